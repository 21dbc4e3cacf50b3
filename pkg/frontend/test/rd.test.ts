import { existsSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { layoutRd, wzReferenceIsLowest } from "../src/rd.js";
import { renderSvg } from "../src/svg.js";
import { main } from "../src/cli.js";

const GOLDEN = join(__dirname, "..", "testdata", "rdsweep", "rdsweep.csv");

describe("rd figure from the golden sweep", () => {
  it("golden data exists (generated by the simulation CLI)", () => {
    expect(existsSync(GOLDEN)).toBe(true);
  });

  it("produces one curve per (M, A) plus the WZ reference", () => {
    const fig = layoutRd(GOLDEN, 2.0);
    expect(fig.series.length).toBe(5); // 4-, 8-, 16-, 32-ASK + reference
    expect(fig.series[fig.series.length - 1].label).toBe("WZ limit");
    for (const s of fig.series.slice(0, -1)) {
      expect(s.points.length).toBe(6);
      // sorted by distortion
      const ds = s.points.map((p) => p[0]);
      expect([...ds].sort((a, b) => a - b)).toEqual(ds);
    }
  });

  it("keeps the WZ reference lowest (paper ordering)", () => {
    expect(wzReferenceIsLowest(GOLDEN, 2.0)).toBe(true);
  });

  it("renders an SVG with all curves", () => {
    const fig = layoutRd(GOLDEN, 2.0);
    const svg = renderSvg(fig);
    expect(svg).toContain("<svg");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(5);
    expect(svg).toContain("WZ limit");
  });

  it("cli writes the figure file", () => {
    const out = join(mkdtempSync(join(tmpdir(), "wzplot-")), "fig2.svg");
    const rc = main(["rd", "--in", GOLDEN, "--sigma2-z", "2.0", "--out", out]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("cli rejects non-svg outputs and bad schema with exit 2", () => {
    const out = join(mkdtempSync(join(tmpdir(), "wzplot-")), "fig2.png");
    // process.exit is called through usage(); run the schema error path instead
    const rc = main(["rd", "--in", "/nonexistent.csv", "--out", out.replace(".png", ".svg")]);
    expect(rc).toBe(2);
  });
});
