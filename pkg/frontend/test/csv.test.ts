import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { CDF_HEADER, RDSWEEP_HEADER, readCsv } from "../src/csv.js";

function tempCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "wzplot-"));
  const path = join(dir, "t.csv");
  writeFileSync(path, content);
  return path;
}

describe("readCsv", () => {
  it("parses a valid cdf file", () => {
    const p = tempCsv("d_threshold,prob_exceed\n0.3,0.9\n0.5,0.25\n");
    const t = readCsv(p, CDF_HEADER);
    expect(t.rows).toEqual([[0.3, 0.9], [0.5, 0.25]]);
  });

  it("rejects a missing column", () => {
    const p = tempCsv("d_threshold\n0.3\n");
    expect(() => readCsv(p, CDF_HEADER)).toThrow(/header mismatch/);
  });

  it("rejects reordered rdsweep headers", () => {
    const p = tempCsv("A,M,sigma2_d,rate_bits,bound_distortion,mc_distortion,mc_stderr\n");
    expect(() => readCsv(p, RDSWEEP_HEADER)).toThrow(/header mismatch/);
  });

  it("rejects non-numeric fields", () => {
    const p = tempCsv("d_threshold,prob_exceed\n0.3,oops\n");
    expect(() => readCsv(p, CDF_HEADER)).toThrow(/non-numeric/);
  });

  it("accepts nan bound columns", () => {
    const p = tempCsv(
      "M,A,sigma2_d,rate_bits,bound_distortion,mc_distortion,mc_stderr\n" +
      "4,10.0,0.3,0.61,nan,0.35,0.001\n",
    );
    const t = readCsv(p, RDSWEEP_HEADER);
    expect(Number.isNaN(t.rows[0][4])).toBe(true);
  });

  it("rejects an empty file", () => {
    const p = tempCsv("");
    expect(() => readCsv(p, CDF_HEADER)).toThrow(/empty/);
  });
});
