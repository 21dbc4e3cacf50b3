import { RDSWEEP_HEADER, readCsv } from "./csv.js";
import { FigureSpec, Series } from "./svg.js";

/** Pure layout: rdsweep rows -> one curve per (M, A) plus the WZ reference. */
export function layoutRd(path: string, sigma2z: number): FigureSpec {
  const table = readCsv(path, RDSWEEP_HEADER);
  const groups = new Map<string, Array<[number, number]>>();
  for (const row of table.rows) {
    const [M, A, , rate, , mcD] = row;
    const key = `${M}-ASK, A=${A}`;
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push([mcD, rate]);
  }
  const series: Series[] = [];
  const allD: number[] = [];
  for (const [label, pts] of groups) {
    pts.sort((a, b) => a[0] - b[0]);
    series.push({ label, points: pts });
    allD.push(...pts.map((p) => p[0]));
  }
  // WZ reference 0.5 log2(sigma_z^2 / D), drawn over the same distortion range
  const dLo = Math.min(...allD);
  const dHi = Math.max(...allD);
  const ref: Array<[number, number]> = [];
  for (let i = 0; i <= 80; i++) {
    const d = dLo + ((dHi - dLo) * i) / 80;
    ref.push([d, Math.max(0, 0.5 * Math.log2(sigma2z / d))]);
  }
  series.push({ label: "WZ limit", points: ref, dashed: true });
  return {
    title: "Rate vs distortion",
    xLabel: "distortion",
    yLabel: "rate [bits/sample]",
    series,
  };
}

/** The WZ reference must lower-bound every measured curve (paper ordering).
 *
 * The x-coordinates are Monte Carlo distortions, so each point may jitter
 * around the reference; the check allows 3 standard errors of the measured
 * distortion propagated through the curve slope |dR/dD| = 1/(2 ln2 D).
 */
export function wzReferenceIsLowest(path: string, sigma2z: number): boolean {
  const table = readCsv(path, RDSWEEP_HEADER);
  for (const row of table.rows) {
    const [, , , rate, , mcD, stderr] = row;
    const wz = Math.max(0, 0.5 * Math.log2(sigma2z / mcD));
    const slack = (3 * stderr) / (2 * Math.LN2 * mcD);
    if (rate < wz - slack - 1e-9) return false;
  }
  return true;
}
