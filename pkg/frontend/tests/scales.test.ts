import { describe, expect, it } from "vitest";
import { linearScale, logScale, tickLabel } from "../src/scales.js";

describe("linearScale", () => {
  it("maps domain endpoints to range endpoints", () => {
    const s = linearScale([0, 10], [70, 622]);
    expect(s.map(0)).toBe(70);
    expect(s.map(10)).toBe(622);
    expect(s.map(5)).toBeCloseTo(346, 10);
  });

  it("supports inverted pixel ranges for y axes", () => {
    const s = linearScale([0, 1], [372, 30]);
    expect(s.map(0)).toBe(372);
    expect(s.map(1)).toBe(30);
    expect(s.map(0.5)).toBeCloseTo(201, 10);
  });

  it("produces nice ticks covering the domain", () => {
    const s = linearScale([0, 1.2], [0, 100]);
    expect(s.ticks()).toEqual([0, 0.2, 0.4, 0.6000000000000001, 0.8, 1, 1.2]);
  });

  it("rejects a degenerate domain", () => {
    expect(() => linearScale([2, 2], [0, 1])).toThrow(/degenerate/);
  });
});

describe("logScale", () => {
  it("maps decades linearly", () => {
    const s = logScale([1e-4, 1e-1], [0, 300]);
    expect(s.map(1e-4)).toBeCloseTo(0, 10);
    expect(s.map(1e-3)).toBeCloseTo(100, 10);
    expect(s.map(1e-1)).toBeCloseTo(300, 10);
  });

  it("ticks at powers of ten across wide domains", () => {
    const s = logScale([1e-4, 1e-1], [0, 300]);
    expect(s.ticks()).toEqual([1e-4, 1e-3, 1e-2, 1e-1]);
  });

  it("falls back to 1-2-5 inside a single decade", () => {
    const s = logScale([0.15, 0.8], [0, 300]);
    expect(s.ticks()).toEqual([0.2, 0.5]);
  });

  it("rejects non-positive domains", () => {
    expect(() => logScale([0, 1], [0, 1])).toThrow(/positive/);
    expect(() => logScale([-1, 1], [0, 1])).toThrow(/positive/);
  });
});

describe("tickLabel", () => {
  it("prints moderate values plainly and strips float noise", () => {
    expect(tickLabel(0)).toBe("0");
    expect(tickLabel(0.6000000000000001)).toBe("0.6");
    expect(tickLabel(1200)).toBe("1200");
  });

  it("uses exponent form for extreme magnitudes", () => {
    expect(tickLabel(1e-8)).toBe("1e-8");
    expect(tickLabel(2.5e6)).toBe("2.5e6");
    expect(tickLabel(1e5)).toBe("1e5");
  });
});
