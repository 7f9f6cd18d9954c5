import type { MatchResponse } from "./types.js";

export interface ChartPoint {
  level: number;
  value: number;
}

export interface ChartSeries {
  filterId: string;
  attribute: "delta_l" | "delta_c" | "contrast_ratio";
  points: ChartPoint[]; // sorted by level
}

export const CHART_ATTRIBUTES = ["delta_l", "delta_c", "contrast_ratio"] as const;

const SERIES_COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/**
 * Assemble per-attribute line series from already-fetched responses only;
 * values are copied verbatim from the server reports.
 */
export function buildChartModel(
  fetched: Map<string, MatchResponse>,
  selected: string[],
): ChartSeries[] {
  const series: ChartSeries[] = [];
  for (const attribute of CHART_ATTRIBUTES) {
    for (const filterId of selected) {
      const points: ChartPoint[] = [];
      for (const response of fetched.values()) {
        if (response.match.filter_id !== filterId) continue;
        points.push({ level: response.match.target, value: response.report[attribute] });
      }
      points.sort((a, b) => a.level - b.level);
      if (points.length) series.push({ filterId, attribute, points });
    }
  }
  return series;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render one attribute's series as a labeled SVG line chart (a string, DOM-free). */
export function renderChartSVG(
  allSeries: ChartSeries[],
  attribute: (typeof CHART_ATTRIBUTES)[number],
  width = 320,
  height = 200,
): string {
  const series = allSeries.filter((s) => s.attribute === attribute);
  const margin = { left: 44, right: 10, top: 14, bottom: 28 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;
  const values = series.flatMap((s) => s.points.map((p) => p.value));
  if (!values.length) {
    return (
      `<svg viewBox="0 0 ${width} ${height}" class="chart" role="img">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="empty">` +
      `no computed levels yet</text></svg>`
    );
  }
  let lo = Math.min(...values, attribute === "delta_c" ? 0 : 1);
  let hi = Math.max(...values, attribute === "delta_c" ? 0 : 1);
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const sx = (level: number) => margin.left + level * innerW;
  const sy = (v: number) => margin.top + (hi - v) / (hi - lo) * innerH;

  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${width} ${height}" class="chart" role="img">`);
  parts.push(
    `<line x1="${margin.left}" y1="${margin.top}" x2="${margin.left}" ` +
    `y2="${margin.top + innerH}" class="axis"/>`,
    `<line x1="${margin.left}" y1="${margin.top + innerH}" ` +
    `x2="${margin.left + innerW}" y2="${margin.top + innerH}" class="axis"/>`,
  );
  for (const tick of [0, 0.5, 1]) {
    parts.push(
      `<text x="${sx(tick)}" y="${height - 8}" text-anchor="middle" class="ticklabel">` +
      `${tick}</text>`,
    );
  }
  for (const tick of [lo, (lo + hi) / 2, hi]) {
    parts.push(
      `<text x="${margin.left - 6}" y="${sy(tick) + 4}" text-anchor="end" class="ticklabel">` +
      `${tick.toFixed(2)}</text>`,
    );
  }
  parts.push(
    `<text x="${margin.left + innerW / 2}" y="${height - 18}" text-anchor="middle" ` +
    `class="axislabel">target smoothing level</text>`,
    `<text x="12" y="${margin.top - 2}" class="axislabel">${esc(attribute)}</text>`,
  );
  series.forEach((s, idx) => {
    const color = SERIES_COLORS[idx % SERIES_COLORS.length];
    if (s.points.length > 1) {
      const d = s.points.map((p) => `${sx(p.level).toFixed(1)},${sy(p.value).toFixed(1)}`).join(" ");
      parts.push(`<polyline points="${d}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
    }
    for (const p of s.points) {
      parts.push(
        `<circle cx="${sx(p.level).toFixed(1)}" cy="${sy(p.value).toFixed(1)}" r="3" ` +
        `fill="${color}"><title>${esc(s.filterId)} level ${p.level}: ${p.value}</title></circle>`,
      );
    }
    parts.push(
      `<text x="${margin.left + innerW - 4}" y="${margin.top + 12 * (idx + 1)}" ` +
      `text-anchor="end" fill="${color}" class="legend">${esc(s.filterId)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}
