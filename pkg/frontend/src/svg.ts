import { Scale, tickLabel } from "./scales.js";

// Fixed canvas so identical inputs give identical bytes.
export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 70, right: 18, top: 30, bottom: 48 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export interface SeriesPoint {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
  dashed?: boolean;
  /** Line without point markers (used for reference lines read from JSON). */
  noMarkers?: boolean;
}

export interface VerticalMarker {
  x: number;
  label: string;
}

export interface FigureLayout {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(v: number): string {
  // two decimals is below visual resolution and keeps bytes stable
  return v.toFixed(2);
}

function axisPath(layout: FigureLayout): string {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  return `M ${px(x0)} ${px(y1)} L ${px(x0)} ${px(y0)} L ${px(x1)} ${px(y0)}`;
}

function xTicks(layout: FigureLayout): string[] {
  const parts: string[] = [];
  const y0 = HEIGHT - MARGIN.bottom;
  for (const t of layout.xScale.ticks()) {
    const x = layout.xScale.map(t);
    parts.push(`<line x1="${px(x)}" y1="${px(y0)}" x2="${px(x)}" y2="${px(y0 + 5)}" class="tick"/>`);
    parts.push(
      `<text x="${px(x)}" y="${px(y0 + 18)}" class="ticklabel" text-anchor="middle">${esc(tickLabel(t))}</text>`,
    );
  }
  return parts;
}

function yTicks(layout: FigureLayout): string[] {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  for (const t of layout.yScale.ticks()) {
    const y = layout.yScale.map(t);
    parts.push(`<line x1="${px(x0 - 5)}" y1="${px(y)}" x2="${px(x0)}" y2="${px(y)}" class="tick"/>`);
    parts.push(
      `<text x="${px(x0 - 8)}" y="${px(y + 3.5)}" class="ticklabel" text-anchor="end">${esc(tickLabel(t))}</text>`,
    );
  }
  return parts;
}

function seriesBody(series: Series[], layout: FigureLayout): string[] {
  const parts: string[] = [];
  series.forEach((s, i) => {
    const colour = PALETTE[i % PALETTE.length]!;
    const pts = s.points.map((p) => ({
      x: layout.xScale.map(p.x),
      y: layout.yScale.map(p.y),
    }));
    if (pts.length > 1) {
      const d = pts.map((p) => `${px(p.x)},${px(p.y)}`).join(" ");
      const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
      parts.push(`<polyline points="${d}" fill="none" stroke="${colour}"${dash} stroke-width="1.5"/>`);
    }
    if (!s.noMarkers) {
      for (const p of pts) {
        parts.push(`<circle cx="${px(p.x)}" cy="${px(p.y)}" r="3" fill="${colour}"/>`);
      }
    }
  });
  return parts;
}

function legend(series: Series[]): string[] {
  if (series.length < 2) return [];
  const parts: string[] = [];
  const x = WIDTH - MARGIN.right - 170;
  let y = MARGIN.top + 10;
  series.forEach((s, i) => {
    const colour = PALETTE[i % PALETTE.length]!;
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(`<line x1="${px(x)}" y1="${px(y - 4)}" x2="${px(x + 22)}" y2="${px(y - 4)}" stroke="${colour}"${dash} stroke-width="1.5"/>`);
    parts.push(`<text x="${px(x + 28)}" y="${px(y)}" class="legend">${esc(s.label)}</text>`);
    y += 16;
  });
  return parts;
}

function markers(layout: FigureLayout, verticals: VerticalMarker[]): string[] {
  const parts: string[] = [];
  const yTop = MARGIN.top;
  const yBot = HEIGHT - MARGIN.bottom;
  for (const m of verticals) {
    const [d0, d1] = layout.xScale.domain;
    if (m.x < d0 || m.x > d1) continue;
    const x = layout.xScale.map(m.x);
    parts.push(
      `<line x1="${px(x)}" y1="${px(yTop)}" x2="${px(x)}" y2="${px(yBot)}" stroke="#444444" stroke-dasharray="3 3"/>`,
    );
    parts.push(
      `<text x="${px(x + 4)}" y="${px(yTop + 12)}" class="marker">${esc(m.label)}</text>`,
    );
  }
  return parts;
}

/** Assemble the full document.  No timestamps, no randomness: the same
 * layout and series always serialize to the same bytes. */
export function buildSvg(
  layout: FigureLayout,
  series: Series[],
  verticals: VerticalMarker[] = [],
): string {
  const body: string[] = [];
  body.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  body.push(`<path d="${axisPath(layout)}" fill="none" stroke="#000000"/>`);
  body.push(...xTicks(layout));
  body.push(...yTicks(layout));
  body.push(
    `<text x="${px((MARGIN.left + WIDTH - MARGIN.right) / 2)}" y="${px(HEIGHT - 10)}" class="axis" text-anchor="middle">${esc(layout.xLabel)}</text>`,
  );
  body.push(
    `<text x="16" y="${px((MARGIN.top + HEIGHT - MARGIN.bottom) / 2)}" class="axis" text-anchor="middle" transform="rotate(-90 16 ${px((MARGIN.top + HEIGHT - MARGIN.bottom) / 2)})">${esc(layout.yLabel)}</text>`,
  );
  body.push(
    `<text x="${px((MARGIN.left + WIDTH - MARGIN.right) / 2)}" y="20" class="title" text-anchor="middle">${esc(layout.title)}</text>`,
  );
  body.push(...markers(layout, verticals));
  body.push(...seriesBody(series, layout));
  body.push(...legend(series));
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<style>text{font-family:sans-serif}.title{font-size:14px}.axis{font-size:12px}.ticklabel{font-size:10px}.legend{font-size:11px}.marker{font-size:10px}</style>`,
    ...body,
    `</svg>`,
    ``,
  ].join("\n");
}
