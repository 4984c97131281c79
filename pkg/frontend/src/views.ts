// Pure HTML renderers: (payload) -> markup string. No fetches, no numeric
// work beyond what the chart builders do for axis scaling.

import { curveOverlay, mapBarChart, mapCompareChart } from "./charts.js";
import { formatMetadata, formatValue } from "./format.js";
import type {
  CohortDetail,
  CohortSummary,
  ComparePayload,
  CurvePayload,
  SubjectReport,
} from "./types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function errorBanner(message: string): string {
  return `<div class="error-banner" role="alert">${esc(message)}</div>`;
}

export function uploadSummaryCard(summary: CohortSummary): string {
  return [
    `<div class="card cohort-card" data-cohort-id="${esc(summary.cohort_id)}">`,
    `<h3>Cohort uploaded</h3>`,
    `<dl>`,
    `<dt>subjects</dt><dd class="n-subjects">${summary.n_subjects}</dd>`,
    `<dt>healthy</dt><dd class="n-healthy">${summary.n_healthy}</dd>`,
    `<dt>grid points</dt><dd class="n-points">${summary.T}</dd>`,
    `</dl>`,
    `</div>`,
  ].join("");
}

export function subjectOptions(detail: CohortDetail): string {
  return detail.subjects.map((s) =>
    `<option value="${esc(s.subject_id)}">${esc(s.subject_id)}` +
    `${s.healthy ? " (healthy)" : ""}</option>`).join("");
}

export function metadataChips(metadata: Record<string, unknown>): string {
  const chips = formatMetadata(metadata);
  if (!chips.length) return "";
  return `<span class="chips">${chips.map((c) => `<span class="chip">${esc(c)}</span>`).join("")}</span>`;
}

export function headline(report: SubjectReport): string {
  const parts: string[] = [`<div class="headline">`];
  parts.push(`<span class="subject-name">${esc(report.subject_id)}</span>`);
  parts.push(metadataChips(report.metadata));
  if (report.sfgdi !== undefined) {
    parts.push(
      `<span class="index-value" data-index="sfgdi" data-value="${formatValue(report.sfgdi)}">` +
      `scaled index <strong>${formatValue(report.sfgdi)}</strong> sd</span>`,
    );
  }
  if (report.gps !== undefined) {
    parts.push(
      `<span class="index-value" data-index="gps" data-value="${formatValue(report.gps)}">` +
      `profile score <strong>${formatValue(report.gps)}</strong> deg</span>`,
    );
  }
  if (report.flags.length) {
    parts.push(`<span class="flags">${esc(report.flags.join(", "))}</span>`);
  }
  parts.push(`</div>`);
  return parts.join("");
}

/** sFGDI headline, MAP bars, and the curve overlay for the chosen variable. */
export function subjectDashboard(report: SubjectReport, curves: CurvePayload | null,
                                 showReconstruction: boolean): string {
  const variables = Object.keys(report.map_profile);
  const values = variables.map((v) => report.map_profile[v]);
  const parts: string[] = [`<section class="dashboard">`];
  parts.push(headline(report));
  parts.push(`<div class="map-panel">${mapBarChart(variables, values)}</div>`);
  if (curves) {
    parts.push(`<div class="curve-panel">${curveOverlay({
      grid: curves.grid,
      observed: curves.observed,
      healthyMean: curves.healthy_mean,
      bandLower: curves.healthy_band.lower,
      bandUpper: curves.healthy_band.upper,
      reconstruction: showReconstruction ? curves.reconstruction : undefined,
      title: curves.label,
    })}</div>`);
  }
  parts.push(`</section>`);
  return parts.join("");
}

export function compareView(payload: ComparePayload): string {
  const parts: string[] = [`<section class="compare">`];
  parts.push(`<div class="compare-heads">`);
  parts.push(`<span>${esc(payload.a.subject_id)} ${metadataChips(payload.a.metadata)}</span>`);
  parts.push(`<span>${esc(payload.b.subject_id)} ${metadataChips(payload.b.metadata)}</span>`);
  parts.push(`</div>`);
  parts.push(mapCompareChart(payload.labels, payload.a.map, payload.b.map,
                             payload.a.subject_id, payload.b.subject_id));
  parts.push(`</section>`);
  return parts.join("");
}

export function fitCounts(counts: Record<string, { W: number | null; K_plus: number }>): string {
  const rows = Object.entries(counts).map(([mode, entry]) =>
    `<tr><td>${esc(mode)}</td><td>${entry.W ?? "-"}</td><td>${entry.K_plus}</td></tr>`);
  return [
    `<table class="counts"><thead>`,
    `<tr><th>mode</th><th>W</th><th>K+</th></tr></thead><tbody>`,
    ...rows,
    `</tbody></table>`,
  ].join("");
}
