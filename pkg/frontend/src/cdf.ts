import { basename } from "path";
import { CDF_HEADER, readCsv } from "./csv.js";
import { FigureSpec, Series } from "./svg.js";

/** Pure layout: one step curve Pr(Delta > d) per input CSV. */
export function layoutCdf(paths: string[]): FigureSpec {
  const series: Series[] = [];
  for (const path of paths) {
    const table = readCsv(path, CDF_HEADER);
    const pts: Array<[number, number]> = [];
    let prev: number | null = null;
    for (const [d, p] of table.rows) {
      if (prev !== null) {
        pts.push([d, prev]); // horizontal run to the next threshold
      }
      pts.push([d, p]);
      prev = p;
    }
    if (pts.length === 0) {
      console.warn(`warning: ${path} has no CDF points; plotting empty curve`);
    }
    series.push({ label: basename(path).replace(/\.csv$/, ""), points: pts });
  }
  return {
    title: "Excess distortion",
    xLabel: "distortion threshold",
    yLabel: "Pr(block distortion > threshold)",
    series,
  };
}

export function stepIsNonIncreasing(s: Series): boolean {
  for (let i = 1; i < s.points.length; i++) {
    if (s.points[i][1] > s.points[i - 1][1] + 1e-12) return false;
  }
  return true;
}
