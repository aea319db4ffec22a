/**
 * Figure-spec files: one JSON document selects a figure class, the
 * input CSV(s), the columns to draw, axis labels and scale choices.
 * Nothing about the physics is recomputed here; the spec only points at
 * columns of the CSV contract.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

const seriesColumn = z.object({
  column: z.string(),
  label: z.string().optional(),
});

export const figureSpecSchema = z
  .object({
    figure: z.enum([
      "fig2",
      "fig3",
      "fig4-map",
      "fig5-cut",
      "fig8-transport",
      "fig10-shift",
    ]),
    inputs: z.array(z.string()).min(1),
    output: z.string(),
    title: z.string().optional(),
    x_column: z.string().optional(),
    y_column: z.string().optional(),
    x_label: z.string().optional(),
    y_label: z.string().optional(),
    x_log: z.boolean().optional(),
    y_log: z.boolean().optional(),
    y_abs: z.boolean().optional(),
    filter: z.record(z.string(), z.union([z.string(), z.number()])).optional(),
    value_column: z.string().optional(),
    y_columns: z.array(seriesColumn).optional(),
    series_by: z.string().optional(),
    panel_by: z.string().optional(),
    width: z.number().int().positive().optional(),
    height: z.number().int().positive().optional(),
  })
  .strict();

export type FigureSpec = z.infer<typeof figureSpecSchema> & {
  /** directory of the spec file; input/output paths resolve against it */
  baseDir: string;
};

export function loadFigureSpec(path: string): FigureSpec {
  const doc = JSON.parse(readFileSync(path, "utf8"));
  const parsed = figureSpecSchema.parse(doc);
  return { ...parsed, baseDir: dirname(resolve(path)) };
}

export function resolveInput(spec: FigureSpec, input: string): string {
  return resolve(spec.baseDir, input);
}
