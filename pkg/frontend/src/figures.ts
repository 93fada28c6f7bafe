import { Cell } from "./csv.js";
import { ScaleKind } from "./scales.js";
import { VerticalMarker } from "./svg.js";

export interface AxisDef {
  column: string;
  kind: ScaleKind;
  label: string;
}

/** One plotted series per distinct key tuple, or one per listed column. */
export type SeriesDef =
  | { mode: "group"; keys: string[]; filter?: Record<string, Cell> }
  | { mode: "columns"; columns: { column: string; label: string }[] };

/** Straight line in log space, read verbatim from a results JSON. */
export interface ReferenceLine {
  label: string;
  slope: number;
  intercept: number;
}

export interface FigureDef {
  id: string;
  title: string;
  required: string[];
  x: AxisDef;
  y: { column: string | null; kind: ScaleKind; label: string };
  series: SeriesDef;
  /** "optional": marker JSON may be omitted; "required": must be given. */
  aux?: "optional" | "required";
  verticalsFromAux?: (aux: unknown) => VerticalMarker[];
  linesFromAux?: (aux: unknown) => ReferenceLine[];
}

function fmt(v: number): string {
  return String(parseFloat(v.toPrecision(4)));
}

function thresholdMarker(aux: unknown): VerticalMarker[] {
  const a = aux as { found?: boolean; omega_th?: number };
  if (!a || !a.found || typeof a.omega_th !== "number") return [];
  return [{ x: a.omega_th, label: `threshold ${fmt(a.omega_th)}` }];
}

function resilienceFitLines(aux: unknown): ReferenceLine[] {
  const a = aux as {
    per_distance?: Record<string, { slope?: number; intercept?: number }>;
  };
  if (!a || !a.per_distance) {
    throw new Error("results JSON lacks per_distance fit parameters");
  }
  const out: ReferenceLine[] = [];
  for (const d of Object.keys(a.per_distance).sort((p, q) => Number(p) - Number(q))) {
    const fit = a.per_distance[d]!;
    if (typeof fit.slope !== "number" || typeof fit.intercept !== "number") continue;
    out.push({ label: `fit d=${d}`, slope: fit.slope, intercept: fit.intercept });
  }
  return out;
}

export const FIGURES: Record<string, FigureDef> = {
  threshold: {
    id: "threshold",
    title: "Logical failure rate vs defect angle",
    required: ["d", "omega", "rate"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: "rate", kind: "linear", label: "logical failure rate" },
    series: { mode: "group", keys: ["d"] },
    aux: "optional",
    verticalsFromAux: thresholdMarker,
  },
  "gap-hist": {
    id: "gap-hist",
    title: "Complementary gap histogram",
    required: ["d", "omega", "gap", "count"],
    x: { column: "gap", kind: "linear", label: "complementary gap" },
    y: { column: "count", kind: "linear", label: "shots" },
    series: { mode: "group", keys: ["d", "omega"] },
  },
  "gap-density": {
    id: "gap-density",
    title: "Accepted defect-angle density after the gap cut",
    required: ["d", "omega", "density"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: "density", kind: "log", label: "accepted density" },
    series: { mode: "group", keys: ["d"] },
  },
  postselect: {
    id: "postselect",
    title: "Post-selected vs unconditioned logical rates",
    required: ["d", "omega", "method", "rate"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: "rate", kind: "log", label: "logical failure rate" },
    series: { mode: "group", keys: ["d", "method"] },
  },
  "rate-fits": {
    id: "rate-fits",
    title: "Conditional failure rates with log-linear fits",
    required: ["d", "omega", "method", "rate"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: "rate", kind: "log", label: "conditional failure rate" },
    series: { mode: "group", keys: ["d"], filter: { method: "postselected" } },
    aux: "required",
    linesFromAux: resilienceFitLines,
  },
  "monitor-density": {
    id: "monitor-density",
    title: "Defect-angle density after monitor post-selection",
    required: ["omega", "density"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: "density", kind: "log", label: "post-selected density" },
    series: { mode: "group", keys: [] },
  },
  "monitor-rms": {
    id: "monitor-rms",
    title: "Angle estimation error vs true angle",
    required: ["omega", "rms", "cr_bound", "noisy_cr_bound"],
    x: { column: "omega", kind: "linear", label: "defect angle (rad)" },
    y: { column: null, kind: "linear", label: "rms error (rad)" },
    series: {
      mode: "columns",
      columns: [
        { column: "rms", label: "measured rms" },
        { column: "cr_bound", label: "CR bound" },
        { column: "noisy_cr_bound", label: "noisy CR bound" },
      ],
    },
  },
  dephasing: {
    id: "dephasing",
    title: "Shuttling infidelity vs speed",
    required: ["encoding", "separation", "speed", "infidelity", "method"],
    x: { column: "speed", kind: "log", label: "shuttle speed (m/s)" },
    y: { column: "infidelity", kind: "log", label: "infidelity" },
    series: { mode: "group", keys: ["encoding", "method", "separation"] },
  },
  percolation: {
    id: "percolation",
    title: "Latticework connectivity under deactivation",
    required: ["topology", "mode", "deactivation_fraction", "spanning_probability"],
    x: {
      column: "deactivation_fraction",
      kind: "linear",
      label: "deactivated fraction",
    },
    y: {
      column: "spanning_probability",
      kind: "linear",
      label: "spanning probability",
    },
    series: { mode: "group", keys: ["topology", "mode"] },
  },
  resilience: {
    id: "resilience",
    title: "Defect-resilience budget vs code distance",
    required: ["d", "logical_rate", "integral", "total"],
    x: { column: "d", kind: "linear", label: "code distance" },
    y: { column: null, kind: "log", label: "rate per d cycles" },
    series: {
      mode: "columns",
      columns: [
        { column: "logical_rate", label: "defect-free P_L" },
        { column: "integral", label: "undetected-defect integral" },
        { column: "total", label: "total logical rate" },
      ],
    },
  },
  route: {
    id: "route",
    title: "Route durations across queries",
    required: ["query", "duration", "reachable"],
    x: { column: "query", kind: "linear", label: "query" },
    y: { column: "duration", kind: "linear", label: "duration (s)" },
    series: { mode: "group", keys: ["reachable"] },
  },
};
