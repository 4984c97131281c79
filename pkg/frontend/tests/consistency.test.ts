// UI consistency against captured service payloads (the exact JSON the
// browser receives; regenerate with scripts/capture_fixtures.py).

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { formatValue } from "../src/format.js";
import type { ComparePayload, CurvePayload, ServiceError, SubjectReport } from "../src/types.js";
import { compareView, errorBanner, subjectDashboard } from "../src/views.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

const report = fixture<SubjectReport>("report");
const curves = fixture<CurvePayload>("curves");
const compareSelf = fixture<ComparePayload>("compare_self");
const uploadError = fixture<ServiceError>("upload_error");

describe("dashboard consistency with the report endpoint", () => {
  it("every MAP bar equals the endpoint's map_profile value at display precision", () => {
    const html = subjectDashboard(report, curves, true);
    const rendered = [...html.matchAll(/<rect[^>]*data-variable="([^"]+)"[^>]*data-value="([^"]+)"/g)]
      .map((m) => [m[1], m[2]] as const);
    const byVariable = new Map(rendered);
    const variables = Object.keys(report.map_profile);
    expect(byVariable.size).toBe(variables.length);
    for (const variable of variables) {
      expect(byVariable.get(variable)).toBe(formatValue(report.map_profile[variable]));
    }
  });

  it("headline index matches the payload's sfgdi", () => {
    const html = subjectDashboard(report, curves, false);
    expect(html).toContain(`data-index="sfgdi" data-value="${formatValue(report.sfgdi!)}"`);
  });
});

describe("self-comparison consistency", () => {
  it("renders identical bar pairs from the compare endpoint payload", () => {
    expect(compareSelf.a.subject_id).toBe(compareSelf.b.subject_id);
    const html = compareView(compareSelf);
    const a = [...html.matchAll(/side-a[^>]*data-value="([^"]+)"/g)].map((m) => m[1]);
    const b = [...html.matchAll(/side-b[^>]*data-value="([^"]+)"/g)].map((m) => m[1]);
    expect(a.length).toBe(compareSelf.variables.length);
    expect(a).toEqual(b);
    expect(a).toEqual(compareSelf.a.map.map(formatValue));
  });
});

describe("upload error surfacing", () => {
  it("shows the service's cell-level message verbatim", () => {
    const html = errorBanner(uploadError.message);
    expect(uploadError.message).toMatch(/t001/);
    expect(html).toContain("t001");
    expect(html).toContain("non-finite angle");
  });
});
