/**
 * `render <figure-spec.json> [...]` — render each spec to its SVG.
 * Exit codes: 0 success, 2 bad spec or missing column, 4 I/O failure.
 */

import { ZodError } from "zod";

import { MissingColumnError } from "./csv.js";
import { render } from "./render.js";
import { loadFigureSpec } from "./spec.js";

export function main(argv: string[]): number {
  if (argv[0] !== "render" || argv.length < 2) {
    console.error("usage: figrender render <figure-spec.json> [...]");
    return 2;
  }
  for (const specPath of argv.slice(1)) {
    try {
      const spec = loadFigureSpec(specPath);
      const out = render(spec);
      console.log(`wrote ${out}`);
    } catch (err) {
      if (err instanceof ZodError) {
        console.error(`invalid figure spec ${specPath}:`);
        for (const issue of err.issues) {
          console.error(`  ${issue.path.join(".")}: ${issue.message}`);
        }
        return 2;
      }
      if (err instanceof MissingColumnError) {
        console.error(String(err.message));
        return 2;
      }
      if (err && (err as NodeJS.ErrnoException).code) {
        console.error(String(err));
        return 4;
      }
      console.error(String(err));
      return 2;
    }
  }
  return 0;
}
