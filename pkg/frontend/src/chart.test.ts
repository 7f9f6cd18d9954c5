import { describe, expect, it } from "vitest";

import { buildChartModel, renderChartSVG } from "./chart.js";
import type { MatchResponse } from "./types.js";

function response(filterId: string, level: number, deltaL: number): MatchResponse {
  return {
    match: {
      filter_id: filterId,
      target: level,
      param: 1,
      normalized_param: 0.1,
      achieved_level: level,
      deviation: 0,
      evaluations: 5,
      converged: true,
    },
    report: {
      so: 1 - level,
      so_smooth: 1 - level,
      so_edge: 1 - level,
      delta_l: deltaL,
      delta_c: level * 2,
      contrast_ratio: 1 - level / 2,
    },
    image_url: `/api/image/s/${filterId}`,
    cached: false,
  };
}

describe("chart model", () => {
  it("builds series only from already-fetched reports, sorted by level", () => {
    const fetched = new Map<string, MatchResponse>();
    fetched.set("gauss@0.500", response("gauss", 0.5, 1.05));
    fetched.set("gauss@0.200", response("gauss", 0.2, 1.01));
    fetched.set("wls@0.200", response("wls", 0.2, 1.02));
    const model = buildChartModel(fetched, ["gauss", "wls"]);
    const gaussDl = model.find((s) => s.filterId === "gauss" && s.attribute === "delta_l")!;
    expect(gaussDl.points).toEqual([
      { level: 0.2, value: 1.01 },
      { level: 0.5, value: 1.05 },
    ]);
    // two-point polyline per attribute for gauss, one point for wls
    expect(model.filter((s) => s.filterId === "wls").every((s) => s.points.length === 1)).toBe(true);
  });

  it("excludes unselected filters", () => {
    const fetched = new Map<string, MatchResponse>();
    fetched.set("gauss@0.500", response("gauss", 0.5, 1.05));
    expect(buildChartModel(fetched, [])).toEqual([]);
  });

  it("passes report values through verbatim", () => {
    const fetched = new Map<string, MatchResponse>();
    const r = response("gauss", 0.3, 1.2345678901);
    fetched.set("gauss@0.300", r);
    const model = buildChartModel(fetched, ["gauss"]);
    const dl = model.find((s) => s.attribute === "delta_l")!;
    expect(dl.points[0].value).toBe(r.report.delta_l);
    const dc = model.find((s) => s.attribute === "delta_c")!;
    expect(dc.points[0].value).toBe(r.report.delta_c);
  });
});

describe("chart SVG", () => {
  it("renders an empty-state message without data", () => {
    const svg = renderChartSVG([], "delta_l");
    expect(svg).toContain("no computed levels yet");
  });

  it("renders axis labels, a polyline, and hover titles with exact values", () => {
    const fetched = new Map<string, MatchResponse>();
    fetched.set("gauss@0.200", response("gauss", 0.2, 1.01));
    fetched.set("gauss@0.500", response("gauss", 0.5, 1.05));
    const model = buildChartModel(fetched, ["gauss"]);
    const svg = renderChartSVG(model, "delta_l");
    expect(svg).toContain("target smoothing level");
    expect(svg).toContain("delta_l");
    expect(svg).toContain("<polyline");
    expect(svg).toContain("<title>gauss level 0.2: 1.01</title>");
    expect(svg).toContain("<title>gauss level 0.5: 1.05</title>");
  });
});
