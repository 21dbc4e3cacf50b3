import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { layoutCdf, stepIsNonIncreasing } from "../src/cdf.js";
import { renderSvg } from "../src/svg.js";
import { main } from "../src/cli.js";

const DATA = join(__dirname, "..", "testdata");
const SOURCE1 = ["source1_onebit", "source1_pcq", "source1_pcqmod"].map((n) =>
  join(DATA, n, "cdf.csv"),
);
const SOURCE2 = ["source2_pcq", "source2_pcqmod"].map((n) => join(DATA, n, "cdf.csv"));
const VECTOR = [
  join(DATA, "vector_pcqmod", "cdf.csv"),
  join(DATA, "vector_pcqmod", "cdf_component1.csv"),
  join(DATA, "vector_pcqmod", "cdf_component2.csv"),
];

describe("cdf figures from the golden runs", () => {
  it("golden data exists (generated by the simulation CLI)", () => {
    for (const p of [...SOURCE1, ...SOURCE2, ...VECTOR]) {
      expect(existsSync(p), p).toBe(true);
    }
  });

  it("three-codec source-1 figure has three nonincreasing steps", () => {
    const fig = layoutCdf(SOURCE1);
    expect(fig.series.length).toBe(3);
    for (const s of fig.series) {
      expect(stepIsNonIncreasing(s)).toBe(true);
      expect(s.points[0][1]).toBeLessThanOrEqual(1.0);
    }
  });

  it("renders the source-2 comparison", () => {
    const svg = renderSvg(layoutCdf(SOURCE2));
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it("vector figure: total curve sits right of the component curves", () => {
    const fig = layoutCdf(VECTOR);
    // median crossing point of the total exceeds each component's
    const median = (pts: Array<[number, number]>) => {
      for (const [d, p] of pts) if (p <= 0.5) return d;
      return pts[pts.length - 1][0];
    };
    const total = median(fig.series[0].points);
    expect(total).toBeGreaterThan(median(fig.series[1].points));
    expect(total).toBeGreaterThan(median(fig.series[2].points));
  });

  it("identical inputs overlay identically", () => {
    const fig = layoutCdf([SOURCE1[1], SOURCE1[1]]);
    expect(fig.series[0].points).toEqual(fig.series[1].points);
  });

  it("empty cdf produces a warning and an empty-plot svg", () => {
    const dir = mkdtempSync(join(tmpdir(), "wzplot-"));
    const p = join(dir, "empty.csv");
    writeFileSync(p, "d_threshold,prob_exceed\n");
    const fig = layoutCdf([p]);
    const svg = renderSvg(fig);
    expect(svg).toContain("no data");
  });

  it("cli writes a figure from several inputs", () => {
    const out = join(mkdtempSync(join(tmpdir(), "wzplot-")), "fig3.svg");
    const rc = main(["cdf", "--in", ...SOURCE1, "--out", out]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });
});
