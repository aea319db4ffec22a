export { parseCsv, readCsv, requireColumns, filterRows, distinct, MissingColumnError } from "./csv.js";
export { figureSpecSchema, loadFigureSpec, resolveInput } from "./spec.js";
export type { FigureSpec } from "./spec.js";
export { render, renderToString } from "./render.js";
