import { readFileSync, writeFileSync } from "node:fs";
import { Cell, Row, num, readTable } from "./csv.js";
import { FIGURES, FigureDef, ReferenceLine } from "./figures.js";
import { Scale, makeScale } from "./scales.js";
import { HEIGHT, MARGIN, Series, VerticalMarker, WIDTH, buildSvg } from "./svg.js";

export interface RenderResult {
  svgPath: string;
  manifestPath: string;
  svg: string;
  droppedPoints: number;
  seriesLabels: string[];
  xScale: Scale;
  yScale: Scale;
}

interface RawSeries {
  label: string;
  order: Cell[];
  points: { x: number; y: number }[];
}

function label(keys: string[], row: Row): string {
  if (keys.length === 0) return "";
  return keys.map((k) => `${k}=${String(row[k])}`).join(" ");
}

function compareOrder(a: Cell[], b: Cell[]): number {
  for (let i = 0; i < Math.min(a.length, b.length); i++) {
    const x = a[i] as Cell;
    const y = b[i] as Cell;
    if (typeof x === "number" && typeof y === "number") {
      if (x !== y) return x - y;
    } else {
      const sx = String(x);
      const sy = String(y);
      if (sx !== sy) return sx < sy ? -1 : 1;
    }
  }
  return a.length - b.length;
}

function collectSeries(def: FigureDef, rows: Row[], path: string): RawSeries[] {
  if (def.series.mode === "columns") {
    const xcol = def.x.column;
    return def.series.columns.map((c) => ({
      label: c.label,
      order: [c.label],
      points: rows.map((r) => ({ x: num(r, xcol, path), y: num(r, c.column, path) })),
    }));
  }
  const { keys, filter } = def.series;
  const ycol = def.y.column;
  if (ycol === null) throw new Error(`${def.id}: grouped figure needs a y column`);
  const byLabel = new Map<string, RawSeries>();
  for (const row of rows) {
    if (filter && Object.entries(filter).some(([k, v]) => row[k] !== v)) continue;
    const lab = label(keys, row);
    let s = byLabel.get(lab);
    if (!s) {
      s = { label: lab, order: keys.map((k) => row[k] as Cell), points: [] };
      byLabel.set(lab, s);
    }
    s.points.push({ x: num(row, def.x.column, path), y: num(row, ycol, path) });
  }
  return [...byLabel.values()].sort((a, b) => compareOrder(a.order, b.order));
}

// Log axes show at most this many decades below the largest value; points
// further down (Gaussian-tail densities reach 1e-300) join the zeros in
// the dropped count rather than stretching the axis into unreadability.
export const LOG_WINDOW_DECADES = 12;

/** Drop what a log axis cannot place; everything kept is plotted verbatim. */
function applyLogFilter(def: FigureDef, series: RawSeries[]): [RawSeries[], number] {
  const floor = (values: number[]): number => {
    let hi = 0;
    for (const v of values) if (v > hi) hi = v;
    return hi * Math.pow(10, -LOG_WINDOW_DECADES);
  };
  const all = series.flatMap((s) => s.points);
  const xFloor = def.x.kind === "log" ? floor(all.map((p) => p.x)) : 0;
  const yFloor = def.y.kind === "log" ? floor(all.map((p) => p.y)) : 0;
  let dropped = 0;
  const keep: RawSeries[] = [];
  for (const s of series) {
    const pts = s.points.filter((p) => {
      const ok =
        (def.x.kind !== "log" || p.x >= xFloor) &&
        (def.y.kind !== "log" || p.y >= yFloor) &&
        (def.x.kind !== "log" || p.x > 0) &&
        (def.y.kind !== "log" || p.y > 0);
      if (!ok) dropped += 1;
      return ok;
    });
    if (pts.length > 0) keep.push({ ...s, points: pts });
  }
  return [keep, dropped];
}

function dataDomain(values: number[], kind: "linear" | "log"): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (kind === "log") {
    if (lo === hi) return [lo / 2, hi * 2];
    const pad = Math.pow(hi / lo, 0.05);
    return [lo / pad, hi * pad];
  }
  if (lo === hi) {
    const w = Math.max(Math.abs(lo), 1);
    return [lo - 0.05 * w, hi + 0.05 * w];
  }
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

/** Reference lines live in log space: clip the segment to the plot box and
 * return its two endpoints (straight under a log y axis). */
function lineSeries(
  lines: ReferenceLine[],
  xDomain: [number, number],
  yDomain: [number, number],
): Series[] {
  const out: Series[] = [];
  const lyLo = Math.log(yDomain[0]);
  const lyHi = Math.log(yDomain[1]);
  for (const ln of lines) {
    let [t0, t1] = xDomain;
    const lyAt = (x: number) => ln.intercept + ln.slope * x;
    if (ln.slope !== 0) {
      const tAtLo = (lyLo - ln.intercept) / ln.slope;
      const tAtHi = (lyHi - ln.intercept) / ln.slope;
      const [ta, tb] = ln.slope > 0 ? [tAtLo, tAtHi] : [tAtHi, tAtLo];
      t0 = Math.max(t0, ta);
      t1 = Math.min(t1, tb);
    } else if (lyAt(t0) < lyLo || lyAt(t0) > lyHi) {
      continue;
    }
    if (!(t1 > t0)) continue;
    out.push({
      label: ln.label,
      dashed: true,
      noMarkers: true,
      points: [
        { x: t0, y: Math.exp(lyAt(t0)) },
        { x: t1, y: Math.exp(lyAt(t1)) },
      ],
    });
  }
  return out;
}

function loadAux(def: FigureDef, jsonPaths: string[]): unknown {
  if (jsonPaths.length > 1) {
    throw new Error(`${def.id}: at most one JSON input, got ${jsonPaths.length}`);
  }
  if (def.aux === "required" && jsonPaths.length === 0) {
    throw new Error(`${def.id}: needs a results JSON alongside the CSV`);
  }
  if (!def.aux && jsonPaths.length > 0) {
    throw new Error(`${def.id}: takes no JSON input`);
  }
  if (jsonPaths.length === 0) return null;
  return JSON.parse(readFileSync(jsonPaths[0]!, "utf8"));
}

export function render(figId: string, inputs: string[], outPath: string): RenderResult {
  const def = FIGURES[figId];
  if (!def) {
    throw new Error(
      `unknown figure ${figId}; known: ${Object.keys(FIGURES).sort().join(", ")}`,
    );
  }
  const csvs = inputs.filter((p) => !p.endsWith(".json"));
  const jsons = inputs.filter((p) => p.endsWith(".json"));
  if (csvs.length !== 1) {
    throw new Error(`${def.id}: expected exactly one CSV input, got ${csvs.length}`);
  }
  const table = readTable(csvs[0]!, def.required);
  const aux = loadAux(def, jsons);

  let series = collectSeries(def, table.rows, table.path);
  const [kept, dropped] = applyLogFilter(def, series);
  series = kept;
  if (series.length === 0) {
    throw new Error(`${table.path}: no plottable points for figure ${def.id}`);
  }
  for (const s of series) s.points.sort((a, b) => a.x - b.x);

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xDomain = dataDomain(xs, def.x.kind);
  const yDomain = dataDomain(ys, def.y.kind);
  const xScale: Scale = makeScale(def.x.kind, xDomain, [
    MARGIN.left,
    WIDTH - MARGIN.right,
  ]);
  const yScale: Scale = makeScale(def.y.kind, yDomain, [
    HEIGHT - MARGIN.bottom,
    MARGIN.top,
  ]);

  const verticals: VerticalMarker[] =
    def.verticalsFromAux && aux !== null ? def.verticalsFromAux(aux) : [];
  const drawn: Series[] = [...series];
  if (def.linesFromAux && aux !== null) {
    if (def.y.kind !== "log") {
      throw new Error(`${def.id}: reference lines need a log y axis`);
    }
    drawn.push(...lineSeries(def.linesFromAux(aux), xDomain, yDomain));
  }

  const svg = buildSvg(
    { title: def.title, xLabel: def.x.label, yLabel: def.y.label, xScale, yScale },
    drawn,
    verticals,
  );
  writeFileSync(outPath, svg);

  const manifestPath = `${outPath}.manifest.json`;
  const manifest = {
    figure: def.id,
    inputs: [...inputs],
    output: outPath,
    series: drawn.map((s) => ({ label: s.label, points: s.points.length })),
    dropped_points: dropped,
  };
  writeFileSync(manifestPath, `${JSON.stringify(manifest, null, 2)}\n`);
  return {
    svgPath: outPath,
    manifestPath,
    svg,
    droppedPoints: dropped,
    seriesLabels: drawn.map((s) => s.label),
    xScale,
    yScale,
  };
}
