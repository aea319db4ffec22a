/**
 * Server-side SVG rendering of the figure classes with echarts.
 *
 * Every renderer consumes only the CSV contract (columns plus metadata
 * header) and the figure spec; no physics is recomputed. Rendering is
 * pure: the same CSV bytes and spec produce the same SVG bytes.
 */

import { writeFileSync } from "node:fs";
import { resolve } from "node:path";
import * as echarts from "echarts";

import {
  distinct,
  filterRows,
  readCsv,
  requireColumns,
  Table,
} from "./csv.js";
import { FigureSpec, resolveInput } from "./spec.js";

type Row = Record<string, number | string>;

const PALETTE = [
  "#c23531", "#2f4554", "#61a0a8", "#d48265", "#91c7ae",
  "#749f83", "#ca8622", "#bda29a", "#6e7074", "#546570",
];

/**
 * Rewrite the zrender instance-scoped identifiers (CSS class names
 * zr<N>-cls-<M> and clip-path ids zr<N>-c<M>) into canonical sequences
 * so that identical inputs give identical bytes no matter how many
 * charts were rendered before in the process.
 */
export function canonicalizeSvg(svg: string): string {
  const mapping = new Map<string, string>();
  const counters = { cls: 0, clip: 0 };
  return svg.replace(/zr\d+-(?:cls-\d+|c\d+)/g, (ident) => {
    let canon = mapping.get(ident);
    if (!canon) {
      if (ident.includes("-cls-")) {
        canon = `zr-cls-${counters.cls++}`;
      } else {
        canon = `zr-clip-${counters.clip++}`;
      }
      mapping.set(ident, canon);
    }
    return canon;
  });
}

function svgChart(option: echarts.EChartsOption, width: number, height: number): string {
  const chart = echarts.init(null, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption({ animation: false, color: PALETTE, ...option });
  const svg = chart.renderToSVGString();
  chart.dispose();
  return canonicalizeSvg(svg);
}

function loadTables(spec: FigureSpec): { table: Table; path: string }[] {
  return spec.inputs.map((input) => {
    const path = resolveInput(spec, input);
    return { table: readCsv(path), path };
  });
}

function maybeAbs(spec: FigureSpec, v: number): number {
  return spec.y_abs ? Math.abs(v) : v;
}

function axis(
  label: string | undefined,
  log: boolean | undefined,
): Record<string, unknown> {
  return {
    type: log ? "log" : "value",
    name: label,
    nameLocation: "middle",
    nameGap: 28,
    axisLine: { show: true },
  };
}

/** One grid of line series; returns option fragments for the given panel. */
function lineSeriesForPanel(
  spec: FigureSpec,
  rows: Row[],
  xCol: string,
  gridIndex: number,
): echarts.SeriesOption[] {
  const series: echarts.SeriesOption[] = [];
  if (spec.y_columns && spec.y_columns.length > 0) {
    for (const yc of spec.y_columns) {
      series.push({
        type: "line",
        name: yc.label ?? yc.column,
        showSymbol: false,
        xAxisIndex: gridIndex,
        yAxisIndex: gridIndex,
        data: rows.map((r) => [r[xCol] as number, maybeAbs(spec, r[yc.column] as number)]),
      });
    }
    return series;
  }
  const groupCols = (spec.series_by ?? "").split(",").filter((s) => s.length);
  const valueCol = spec.value_column as string;
  const keyOf = (r: Row) => groupCols.map((c) => `${c}=${r[c]}`).join(", ");
  const keys = groupCols.length ? [...new Set(rows.map(keyOf))] : [""];
  for (const key of keys) {
    const sel = groupCols.length ? rows.filter((r) => keyOf(r) === key) : rows;
    series.push({
      type: "line",
      name: key || valueCol,
      showSymbol: false,
      xAxisIndex: gridIndex,
      yAxisIndex: gridIndex,
      data: sel.map((r) => [r[xCol] as number, maybeAbs(spec, r[valueCol] as number)]),
    });
  }
  return series;
}

function renderLines(spec: FigureSpec): string {
  const tables = loadTables(spec);
  const xCol = spec.x_column ?? "omega_scaled";
  const needed = [xCol];
  if (spec.y_columns) needed.push(...spec.y_columns.map((c) => c.column));
  if (spec.value_column) needed.push(spec.value_column);
  if (spec.series_by) needed.push(...spec.series_by.split(","));
  if (spec.panel_by) needed.push(spec.panel_by);
  for (const { table, path } of tables) {
    requireColumns(table, needed, path);
  }
  if (!spec.y_columns && !spec.value_column) {
    throw new Error("line figures need y_columns or value_column");
  }
  const rows = tables.flatMap(({ table }) => filterRows(table, spec.filter));
  const panels = spec.panel_by ? distinct(rows, spec.panel_by) : [null];

  const grids: unknown[] = [];
  const xAxes: unknown[] = [];
  const yAxes: unknown[] = [];
  const titles: unknown[] = [
    { text: spec.title ?? spec.figure, left: "center" },
  ];
  let series: echarts.SeriesOption[] = [];
  const ncol = panels.length > 1 ? 2 : 1;
  const nrow = Math.ceil(panels.length / ncol);
  panels.forEach((panel, i) => {
    const col = i % ncol;
    const row = Math.floor(i / ncol);
    grids.push({
      left: `${8 + col * (92 / ncol)}%`,
      top: `${12 + row * (84 / nrow)}%`,
      width: `${92 / ncol - 10}%`,
      height: `${84 / nrow - 12}%`,
    });
    xAxes.push({ ...axis(spec.x_label, spec.x_log), gridIndex: i });
    yAxes.push({ ...axis(spec.y_label, spec.y_log), gridIndex: i });
    const sel = panel === null ? rows : rows.filter((r) => r[spec.panel_by!] === panel);
    if (panel !== null) {
      titles.push({
        text: `${spec.panel_by} = ${panel}`,
        textStyle: { fontSize: 12 },
        left: `${8 + col * (92 / ncol)}%`,
        top: `${7 + row * (84 / nrow)}%`,
      });
    }
    series = series.concat(lineSeriesForPanel(spec, sel, xCol, i));
  });
  // one legend entry per distinct series name
  const names = [...new Set(series.map((s) => s.name as string))];
  return svgChart(
    {
      title: titles as echarts.TitleComponentOption[],
      legend: { data: names, top: 24 },
      grid: grids as echarts.GridComponentOption[],
      xAxis: xAxes as echarts.XAXisComponentOption[],
      yAxis: yAxes as echarts.YAXisComponentOption[],
      series,
    },
    spec.width ?? 900,
    spec.height ?? (panels.length > 2 ? 800 : 560),
  );
}

function renderMap(spec: FigureSpec): string {
  const { table, path } = loadTables(spec)[0];
  const xCol = spec.x_column ?? "a_nm";
  const yCol = spec.y_column ?? "omega_scaled";
  const vCol = spec.value_column;
  if (!vCol) throw new Error("map figures need value_column");
  requireColumns(table, [xCol, yCol, vCol], path);
  const rows = filterRows(table, spec.filter).filter((r) => r.status === "ok");
  const xs = distinct(rows, xCol) as number[];
  const ys = distinct(rows, yCol) as number[];
  xs.sort((a, b) => a - b);
  ys.sort((a, b) => a - b);
  const data = rows.map((r) => [
    xs.indexOf(r[xCol] as number),
    ys.indexOf(r[yCol] as number),
    maybeAbs(spec, r[vCol] as number),
  ]);
  const values = data.map((d) => d[2] as number);
  const lim = Math.max(...values.map((v) => Math.abs(v)));
  return svgChart(
    {
      title: { text: spec.title ?? spec.figure, left: "center" },
      grid: { left: 90, right: 110, top: 50, bottom: 60 },
      xAxis: {
        type: "category",
        data: xs.map((v) => v.toPrecision(4)),
        name: spec.x_label ?? xCol,
        nameLocation: "middle",
        nameGap: 30,
      },
      yAxis: {
        type: "category",
        data: ys.map((v) => v.toPrecision(4)),
        name: spec.y_label ?? yCol,
        nameLocation: "middle",
        nameGap: 55,
      },
      visualMap: {
        min: spec.y_abs ? 0 : -lim,
        max: lim,
        calculable: false,
        orient: "vertical",
        right: 10,
        top: "center",
        inRange: {
          color: spec.y_abs
            ? ["#ffffff", "#b8dff2", "#2f7ebc", "#08306b"]
            : ["#2166ac", "#f7f7f7", "#b2182b"],
        },
      },
      series: [{ type: "heatmap", data, progressive: 0 }],
    },
    spec.width ?? 860,
    spec.height ?? 620,
  );
}

function renderTransport(spec: FigureSpec): string {
  const { table, path } = loadTables(spec)[0];
  requireColumns(table, ["t_gamma", "n_total"], path);
  const siteCols = table.columns.filter((c) => c.startsWith("n_site_"));
  if (siteCols.length === 0) {
    throw new Error(`no n_site_* columns in ${path}`);
  }
  const rows = table.rows;
  const stride = Math.max(1, Math.floor(rows.length / 300));
  const sampled = rows.filter((_, i) => i % stride === 0);
  const heat: [number, number, number][] = [];
  sampled.forEach((r, ti) => {
    siteCols.forEach((c, si) => {
      heat.push([ti, si, r[c] as number]);
    });
  });
  const tPeak = Number(table.metadata["gamma-t-peak"]);
  const totalLine = rows.map((r) => [r.t_gamma as number, r.n_total as number]);
  const lim = Math.max(...heat.map((h) => h[2]));
  const option: echarts.EChartsOption = {
    title: { text: spec.title ?? "excitation transport", left: "center" },
    grid: [
      { left: 80, right: 110, top: 50, height: "38%" },
      { left: 80, right: 110, top: "62%", height: "28%" },
    ],
    xAxis: [
      {
        type: "category",
        gridIndex: 0,
        data: sampled.map((r) => (r.t_gamma as number).toFixed(2)),
        name: spec.x_label ?? "gamma t",
        nameLocation: "middle",
        nameGap: 26,
      },
      {
        type: "value",
        gridIndex: 1,
        name: spec.x_label ?? "gamma t",
        nameLocation: "middle",
        nameGap: 26,
      },
    ],
    yAxis: [
      {
        type: "category",
        gridIndex: 0,
        data: siteCols.map((_, i) => `${i + 1}`),
        name: "site",
        nameLocation: "middle",
        nameGap: 35,
      },
      {
        type: spec.y_log ? "log" : "value",
        gridIndex: 1,
        name: spec.y_label ?? "total excitation",
        nameLocation: "middle",
        nameGap: 40,
      },
    ],
    visualMap: {
      min: 0,
      max: lim,
      orient: "vertical",
      right: 10,
      top: "center",
      inRange: { color: ["#00030f", "#24478f", "#38b0de", "#e9f7a0"] },
    },
    series: [
      { type: "heatmap", xAxisIndex: 0, yAxisIndex: 0, data: heat, progressive: 0 },
      {
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: false,
        data: totalLine,
        markLine: Number.isFinite(tPeak)
          ? {
              symbol: "none",
              label: { formatter: `t_P = ${tPeak.toFixed(3)}/γ` },
              data: [{ xAxis: tPeak }],
              lineStyle: { type: "dashed", color: "#c23531" },
            }
          : undefined,
      },
    ],
  };
  return svgChart(option, spec.width ?? 900, spec.height ?? 760);
}

export function renderToString(spec: FigureSpec): string {
  switch (spec.figure) {
    case "fig4-map":
      return renderMap(spec);
    case "fig8-transport":
      return renderTransport(spec);
    default:
      return renderLines(spec);
  }
}

export function render(spec: FigureSpec): string {
  const svg = renderToString(spec);
  const outPath = resolve(spec.baseDir, spec.output);
  writeFileSync(outPath, svg);
  return outPath;
}
