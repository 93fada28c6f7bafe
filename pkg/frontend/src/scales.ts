export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  domain: [number, number];
  range: [number, number];
  map(value: number): number;
  ticks(): number[];
}

/** Exact power of ten: Math.pow(10, -4) is an ulp off the 1e-4 literal. */
function pow10(e: number): number {
  return parseFloat(`1e${e}`);
}

/** Largest "nice" step (1, 2 or 5 times a power of ten) below span/n. */
function niceStep(span: number, n: number): number {
  const raw = span / Math.max(n, 1);
  const pow = pow10(Math.floor(Math.log10(raw)));
  for (const m of [5, 2, 1]) {
    // ulp slack: 1.2/6 lands a hair under 0.2 and must still pick step 0.2
    if (m * pow <= raw * (1 + 1e-9)) return m * pow;
  }
  return pow;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  if (!(d1 > d0)) throw new Error(`degenerate linear domain [${d0}, ${d1}]`);
  const k = (r1 - r0) / (d1 - d0);
  return {
    kind: "linear",
    domain,
    range,
    map: (v) => r0 + (v - d0) * k,
    ticks: () => {
      const step = niceStep(d1 - d0, 6);
      const out: number[] = [];
      // float-noise guard keeps the last tick when it lands on the edge
      for (let t = Math.ceil(d0 / step) * step; t <= d1 + step * 1e-9; t += step) {
        out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
      }
      return out;
    },
  };
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  if (!(d0 > 0) || !(d1 > d0)) {
    throw new Error(`log domain must be positive and increasing, got [${d0}, ${d1}]`);
  }
  const l0 = Math.log10(d0);
  const k = (r1 - r0) / (Math.log10(d1) - l0);
  return {
    kind: "log",
    domain,
    range,
    map: (v) => r0 + (Math.log10(v) - l0) * k,
    ticks: () => {
      const out: number[] = [];
      for (let e = Math.ceil(l0 - 1e-9); pow10(e) <= d1 * (1 + 1e-9); e += 1) {
        const t = pow10(e);
        if (t >= d0 * (1 - 1e-9)) out.push(t);
      }
      // a single decade gives no interior structure; fall back to 1-2-5
      if (out.length < 2) {
        const extra: number[] = [];
        for (let e = Math.floor(l0); pow10(e) <= d1; e += 1) {
          for (const m of [1, 2, 5]) {
            const t = m * pow10(e);
            if (t >= d0 * (1 - 1e-9) && t <= d1 * (1 + 1e-9)) extra.push(t);
          }
        }
        if (extra.length >= 2) return extra;
      }
      return out;
    },
  };
}

export function makeScale(
  kind: ScaleKind,
  domain: [number, number],
  range: [number, number],
): Scale {
  return kind === "log" ? logScale(domain, range) : linearScale(domain, range);
}

/** Tick label: plain text for moderate magnitudes, exponent form outside. */
export function tickLabel(value: number): string {
  if (value === 0) return "0";
  const a = Math.abs(value);
  if (a >= 1e-3 && a < 1e5) {
    // strip float-representation noise like 0.30000000000000004
    return String(parseFloat(value.toPrecision(10)));
  }
  const e = Math.floor(Math.log10(a));
  const m = value / Math.pow(10, e);
  const mant = parseFloat(m.toPrecision(6));
  return mant === 1 ? `1e${e}` : `${mant}e${e}`;
}
