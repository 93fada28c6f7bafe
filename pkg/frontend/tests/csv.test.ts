import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { num, readTable } from "../src/csv.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function tempCsv(body: string): string {
  const dir = mkdtempSync(join(tmpdir(), "figcsv-"));
  const path = join(dir, "t.csv");
  writeFileSync(path, body);
  return path;
}

describe("readTable", () => {
  it("reads a real artifact with its manifest comment line", () => {
    const t = readTable(join(FIXTURES, "threshold", "threshold.csv"), [
      "d",
      "omega",
      "rate",
    ]);
    expect(t.rows.length).toBeGreaterThan(0);
    expect(typeof t.rows[0]!.rate).toBe("number");
    expect(t.columns).toContain("seed");
  });

  it("rejects a table with missing columns, naming them", () => {
    const path = tempCsv("a,b\n1,2\n");
    expect(() => readTable(path, ["a", "rate"])).toThrow(/missing columns rate/);
  });

  it("rejects an empty table instead of plotting nothing", () => {
    const path = tempCsv("a,b\n");
    expect(() => readTable(path, ["a", "b"])).toThrow(/no data rows/);
  });

  it("skips comment lines anywhere in the file", () => {
    const path = tempCsv("# manifest: x.json\na,b\n1,2\n# trailing note\n3,4\n");
    const t = readTable(path, ["a", "b"]);
    expect(t.rows).toEqual([
      { a: 1, b: 2 },
      { a: 3, b: 4 },
    ]);
  });
});

describe("num", () => {
  it("returns numeric cells and rejects anything else", () => {
    expect(num({ x: 2.5 }, "x", "p")).toBe(2.5);
    expect(() => num({ x: "raw" }, "x", "p")).toThrow(/non-numeric/);
    expect(() => num({ x: NaN }, "x", "p")).toThrow(/non-numeric/);
  });
});
