import { readFileSync } from "fs";

export interface Table {
  header: string[];
  rows: number[][];
}

/** Read a simulation CSV and require the exact documented header. */
export function readCsv(path: string, expectedHeader: string[]): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  if (header.length !== expectedHeader.length ||
      !expectedHeader.every((h, i) => header[i] === h)) {
    throw new Error(
      `${path}: header mismatch: expected "${expectedHeader.join(",")}", got "${lines[0]}"`,
    );
  }
  const rows: number[][] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== expectedHeader.length) {
      throw new Error(`${path}: row has ${parts.length} fields, expected ${expectedHeader.length}`);
    }
    const row = parts.map(Number);
    if (row.some((v, i) => Number.isNaN(v) && parts[i] !== "nan")) {
      throw new Error(`${path}: non-numeric field in row: ${line}`);
    }
    rows.push(row);
  }
  return { header, rows };
}

export const RDSWEEP_HEADER = [
  "M", "A", "sigma2_d", "rate_bits", "bound_distortion", "mc_distortion", "mc_stderr",
];
export const CDF_HEADER = ["d_threshold", "prob_exceed"];
