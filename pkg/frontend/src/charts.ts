// Hand-rolled SVG charts as pure string builders. The only arithmetic here
// maps data values onto pixel coordinates (axis scaling); every rendered
// value is carried verbatim in a data-value attribute.

import { formatValue } from "./format.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface BarChartOptions {
  width?: number;
  height?: number;
  highlight?: number; // |value| above this is drawn in the alert colour
}

const BAR_DEFAULTS = { width: 720, height: 260, highlight: 2 };

/** One bar per variable; bar height is the per-variable sFGDI in healthy-sd units. */
export function mapBarChart(labels: string[], values: number[],
                            options: BarChartOptions = {}): string {
  const { width, height, highlight } = { ...BAR_DEFAULTS, ...options };
  const top = 12;
  const bottom = 78;
  const plotH = height - top - bottom;
  const span = Math.max(2.5, ...values.map(Math.abs)) * 1.15;
  const zeroY = top + plotH / 2;
  const scale = plotH / 2 / span;
  const slot = width / Math.max(labels.length, 1);
  const barW = Math.min(28, slot * 0.6);

  const parts: string[] = [];
  parts.push(`<svg class="map-chart" viewBox="0 0 ${width} ${height}" role="img">`);
  parts.push(`<line x1="0" y1="${zeroY}" x2="${width}" y2="${zeroY}" class="zero-line"/>`);
  values.forEach((value, i) => {
    const h = Math.abs(value) * scale;
    const x = i * slot + (slot - barW) / 2;
    const y = value >= 0 ? zeroY - h : zeroY;
    const cls = Math.abs(value) > highlight ? "bar alert" : "bar";
    parts.push(
      `<rect class="${cls}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
      `width="${barW.toFixed(1)}" height="${h.toFixed(1)}" ` +
      `data-variable="${esc(labels[i])}" data-value="${formatValue(value)}">` +
      `<title>${esc(labels[i])}: ${formatValue(value)} sd</title></rect>`,
    );
    const lx = i * slot + slot / 2;
    parts.push(
      `<text class="bar-label" x="${lx.toFixed(1)}" y="${height - 6}" ` +
      `transform="rotate(-45 ${lx.toFixed(1)} ${height - 6})">${esc(labels[i])}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

/** Grouped bars for two subjects on a shared axis. */
export function mapCompareChart(labels: string[], a: number[], b: number[],
                                nameA: string, nameB: string,
                                options: BarChartOptions = {}): string {
  const { width, height } = { ...BAR_DEFAULTS, ...options };
  const top = 26;
  const bottom = 78;
  const plotH = height - top - bottom;
  const span = Math.max(2.5, ...a.map(Math.abs), ...b.map(Math.abs)) * 1.15;
  const zeroY = top + plotH / 2;
  const scale = plotH / 2 / span;
  const slot = width / Math.max(labels.length, 1);
  const barW = Math.min(13, slot * 0.3);

  const bar = (value: number, x: number, cls: string, subject: string,
               label: string): string => {
    const h = Math.abs(value) * scale;
    const y = value >= 0 ? zeroY - h : zeroY;
    return (
      `<rect class="${cls}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
      `width="${barW.toFixed(1)}" height="${h.toFixed(1)}" ` +
      `data-subject="${esc(subject)}" data-variable="${esc(label)}" ` +
      `data-value="${formatValue(value)}">` +
      `<title>${esc(subject)} / ${esc(label)}: ${formatValue(value)} sd</title></rect>`
    );
  };

  const parts: string[] = [];
  parts.push(`<svg class="map-chart compare" viewBox="0 0 ${width} ${height}" role="img">`);
  parts.push(`<text class="legend a" x="8" y="14">${esc(nameA)}</text>`);
  parts.push(`<text class="legend b" x="90" y="14">${esc(nameB)}</text>`);
  parts.push(`<line x1="0" y1="${zeroY}" x2="${width}" y2="${zeroY}" class="zero-line"/>`);
  labels.forEach((label, i) => {
    const mid = i * slot + slot / 2;
    parts.push(bar(a[i], mid - barW - 1, "bar side-a", nameA, label));
    parts.push(bar(b[i], mid + 1, "bar side-b", nameB, label));
    parts.push(
      `<text class="bar-label" x="${mid.toFixed(1)}" y="${height - 6}" ` +
      `transform="rotate(-45 ${mid.toFixed(1)} ${height - 6})">${esc(label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

export interface OverlayInput {
  grid: number[];
  observed: number[];
  healthyMean: number[];
  bandLower: number[];
  bandUpper: number[];
  reconstruction?: number[];
  title: string;
}

/** Observed curve over the healthy min-max band and mean, reconstruction optional. */
export function curveOverlay(input: OverlayInput, width = 560, height = 300): string {
  const margin = { left: 44, right: 10, top: 24, bottom: 30 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const all = [...input.observed, ...input.bandLower, ...input.bandUpper,
               ...input.healthyMean, ...(input.reconstruction ?? [])];
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const pad = (hi - lo || 1) * 0.06;
  const yMin = lo - pad;
  const yMax = hi + pad;
  const tMin = input.grid[0];
  const tMax = input.grid[input.grid.length - 1];

  const px = (t: number) => margin.left + ((t - tMin) / (tMax - tMin)) * plotW;
  const py = (v: number) => margin.top + (1 - (v - yMin) / (yMax - yMin)) * plotH;
  const path = (values: number[]) =>
    values.map((v, i) => `${i ? "L" : "M"}${px(input.grid[i]).toFixed(1)},${py(v).toFixed(1)}`).join("");

  const bandPoints = input.grid.map((t, i) => `${px(t).toFixed(1)},${py(input.bandUpper[i]).toFixed(1)}`)
    .concat([...input.grid].reverse().map((t, i) => {
      const j = input.grid.length - 1 - i;
      return `${px(t).toFixed(1)},${py(input.bandLower[j]).toFixed(1)}`;
    }));

  const parts: string[] = [];
  parts.push(`<svg class="curve-chart" viewBox="0 0 ${width} ${height}" role="img">`);
  parts.push(`<text class="chart-title" x="${margin.left}" y="15">${esc(input.title)}</text>`);
  parts.push(`<polygon class="healthy-band" points="${bandPoints.join(" ")}"/>`);
  parts.push(`<path class="healthy-mean" d="${path(input.healthyMean)}"/>`);
  parts.push(`<path class="observed" d="${path(input.observed)}"/>`);
  if (input.reconstruction) {
    parts.push(`<path class="reconstruction" d="${path(input.reconstruction)}"/>`);
  }
  const y0 = py(yMin);
  parts.push(`<line class="axis" x1="${margin.left}" y1="${y0}" x2="${width - margin.right}" y2="${y0}"/>`);
  for (const t of [0, 25, 50, 75, 100]) {
    if (t < tMin || t > tMax) continue;
    parts.push(`<text class="tick" x="${px(t).toFixed(1)}" y="${height - 8}">${t}%</text>`);
  }
  for (const v of [yMin + pad, yMax - pad]) {
    parts.push(`<text class="tick y" x="4" y="${py(v).toFixed(1)}">${v.toFixed(0)}</text>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
