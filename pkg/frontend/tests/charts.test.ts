import { describe, expect, it } from "vitest";

import { curveOverlay, mapBarChart, mapCompareChart } from "../src/charts.js";
import { formatValue } from "../src/format.js";

function barValues(svg: string, selector = ""): string[] {
  const out: string[] = [];
  const pattern = /<rect[^>]*data-value="([^"]+)"[^>]*>/g;
  for (const match of svg.matchAll(pattern)) {
    if (!selector || match[0].includes(selector)) out.push(match[1]);
  }
  return out;
}

describe("mapBarChart", () => {
  const profile = {
    L_pelvic_tilt: 0.31415,
    L_knee_flexion: -1.2599,
    L_ankle_dorsiflexion: 4.0481,
  };

  it("renders one bar per variable carrying the payload value at display precision", () => {
    const labels = Object.keys(profile);
    const values = Object.values(profile);
    const svg = mapBarChart(labels, values);
    expect(barValues(svg)).toEqual(values.map(formatValue));
    for (const label of labels) {
      expect(svg).toContain(`data-variable="${label}"`);
    }
  });

  it("marks strongly deviant variables", () => {
    const svg = mapBarChart(["a", "b"], [0.5, 3.5]);
    expect(svg).toContain('class="bar alert"');
    const calm = mapBarChart(["a"], [0.5]);
    expect(calm).not.toContain("alert");
  });

  it("draws a zero baseline", () => {
    expect(mapBarChart(["a"], [1.0])).toContain("zero-line");
  });
});

describe("mapCompareChart", () => {
  it("renders identical bar pairs for a self-comparison", () => {
    const values = [0.4, -1.7, 2.9, 0.0];
    const labels = ["w", "x", "y", "z"];
    const svg = mapCompareChart(labels, values, values, "p000", "p000");
    const a = barValues(svg, "side-a");
    const b = barValues(svg, "side-b");
    expect(a).toEqual(b);
    expect(a).toEqual(values.map(formatValue));
  });

  it("keeps both subjects' values verbatim on a shared axis", () => {
    const svg = mapCompareChart(["v1", "v2"], [1.0, -0.5], [2.25, 0.75], "a", "b");
    expect(barValues(svg, "side-a")).toEqual(["1.00", "-0.50"]);
    expect(barValues(svg, "side-b")).toEqual(["2.25", "0.75"]);
  });
});

describe("curveOverlay", () => {
  const input = {
    grid: [0, 50, 100],
    observed: [1, 2, 3],
    healthyMean: [1, 1.5, 2],
    bandLower: [0.5, 1, 1.5],
    bandUpper: [1.5, 2, 2.5],
    title: "LHS knee flexion/extension",
  };

  it("renders band, mean and observed layers", () => {
    const svg = curveOverlay(input);
    expect(svg).toContain("healthy-band");
    expect(svg).toContain("healthy-mean");
    expect(svg).toContain('class="observed"');
    expect(svg).not.toContain("reconstruction");
  });

  it("adds the reconstruction trace only when provided", () => {
    const svg = curveOverlay({ ...input, reconstruction: [1.1, 2.1, 2.9] });
    expect(svg).toContain('class="reconstruction"');
  });
});
