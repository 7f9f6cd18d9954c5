import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "./api.js";
import { DEBOUNCE_MS, ExplorerController } from "./controller.js";
import type { MatchResponse } from "./types.js";

interface MatchCall {
  filterId: string;
  level: number;
  resolve: (r: MatchResponse) => void;
  reject: (e: Error) => void;
}

function makeResponse(filterId: string, level: number, extra: Partial<MatchResponse["match"]> = {}): MatchResponse {
  return {
    match: {
      filter_id: filterId,
      target: level,
      param: 1.25,
      normalized_param: 0.078125,
      achieved_level: level + 0.0004,
      deviation: 0.0004,
      evaluations: 11,
      converged: true,
      ...extra,
    },
    report: {
      so: 1 - level,
      so_smooth: 1 - level - 0.05,
      so_edge: 1 - level + 0.07,
      delta_l: 1.0123,
      delta_c: 0.456,
      contrast_ratio: 0.789,
    },
    image_url: `/api/image/s1/${filterId}@${level.toFixed(3)}`,
    cached: false,
  };
}

class MockApi {
  calls: MatchCall[] = [];
  uploads = 0;
  failUpload = false;
  sessionCounter = 0;

  client(): ApiClient {
    const fetchLike = async (input: string, init?: RequestInit): Promise<Response> => {
      if (input.endsWith("/api/filters")) {
        return Response.json([
          { id: "gauss", param_name: "sigma", param_max: 16, monotone: true, kind: "native" },
          { id: "wls", param_name: "lambda", param_max: 10, monotone: true, kind: "native" },
          { id: "gif", param_name: "radius", param_max: 10, monotone: true, kind: "native" },
        ]);
      }
      if (input.endsWith("/api/session")) {
        this.uploads += 1;
        if (this.failUpload) {
          return Response.json({ error: "cannot decode upload" }, { status: 400 });
        }
        this.sessionCounter += 1;
        return Response.json({
          session_id: `s${this.sessionCounter}`,
          width: 32,
          height: 32,
          scale: 1,
        });
      }
      if (input.endsWith("/api/match")) {
        const body = JSON.parse(String(init?.body)) as {
          filter_id: string;
          level: number;
        };
        return new Promise<Response>((resolveOuter) => {
          this.calls.push({
            filterId: body.filter_id,
            level: body.level,
            resolve: (r) => resolveOuter(Response.json(r)),
            reject: (e) => resolveOuter(Response.json({ error: e.message }, { status: 500 })),
          });
        });
      }
      throw new Error(`unexpected fetch ${input}`);
    };
    return new ApiClient("", fetchLike);
  }
}

describe("ExplorerController", () => {
  let mock: MockApi;
  let controller: ExplorerController;

  beforeEach(() => {
    vi.useFakeTimers();
    mock = new MockApi();
    controller = new ExplorerController(mock.client());
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  async function start(): Promise<void> {
    await controller.loadFilters();
    await controller.upload(new Blob([new Uint8Array([1])]), "x.png");
  }

  it("upload creates a session and enables the view", async () => {
    await start();
    const state = controller.getState();
    expect(state.session?.session_id).toBe("s1");
    expect(state.level).toBe(0);
    expect(state.originalUrl).toBe("/api/image/s1/input");
    expect(state.banner).toBeNull();
  });

  it("failed upload surfaces a dismissible banner and keeps no partial state", async () => {
    await controller.loadFilters();
    mock.failUpload = true;
    await controller.upload(new Blob([new Uint8Array([1])]), "x.png");
    const state = controller.getState();
    expect(state.session).toBeNull();
    expect(state.banner).toContain("cannot decode upload");
    controller.dismissBanner();
    expect(controller.getState().banner).toBeNull();
  });

  it("issues exactly one debounced burst per settled slider value", async () => {
    await start();
    controller.toggleFilter("gauss");
    controller.toggleFilter("wls");
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    mock.calls.length = 0;

    // rapid dragging: many intermediate values, one settled value
    for (const level of [0.1, 0.2, 0.3, 0.4, 0.5]) {
      controller.setLevel(level);
      await vi.advanceTimersByTimeAsync(50); // below the debounce window
    }
    expect(mock.calls.length).toBe(0);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    expect(mock.calls.map((c) => [c.filterId, c.level])).toEqual([
      ["gauss", 0.5],
      ["wls", 0.5],
    ]);
  });

  it("discards stale responses for superseded slider values", async () => {
    await start();
    controller.toggleFilter("gauss");
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    controller.setLevel(0.3);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    const slowCall = mock.calls.find((c) => c.level === 0.3)!;

    controller.setLevel(0.8);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    const freshCall = mock.calls.find((c) => c.level === 0.8)!;

    // the older request resolves after the newer one
    freshCall.resolve(makeResponse("gauss", 0.8));
    await vi.advanceTimersByTimeAsync(1);
    slowCall.resolve(makeResponse("gauss", 0.3));
    await vi.advanceTimersByTimeAsync(1);

    const tile = controller.getState().tiles[0];
    expect(tile.status).toBe("ready");
    expect(tile.response?.match.target).toBe(0.8);
    // the stale 0.3 response is archived nowhere and never rendered
    expect(controller.getState().fetched.has("gauss@0.300")).toBe(false);
  });

  it("renders only server-supplied numbers (pass-through)", async () => {
    await start();
    controller.toggleFilter("gauss");
    controller.setLevel(0.4);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    const sentinel = makeResponse("gauss", 0.4, {
      param: 123.456,
      deviation: 0.000777,
      achieved_level: 0.399223,
    });
    sentinel.report = {
      so: 0.111,
      so_smooth: 0.222,
      so_edge: 0.333,
      delta_l: 4.444,
      delta_c: 5.555,
      contrast_ratio: 6.666,
    };
    mock.calls[0].resolve(sentinel);
    await vi.advanceTimersByTimeAsync(1);
    const tile = controller.getState().tiles[0];
    expect(tile.response).toEqual(sentinel);
    expect(tile.response!.report).toEqual(sentinel.report);
    expect(tile.response!.match.param).toBe(123.456);
  });

  it("toggling a filter off removes its tile without leaking state", async () => {
    await start();
    controller.toggleFilter("gauss");
    controller.toggleFilter("wls");
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    for (const call of [...mock.calls]) call.resolve(makeResponse(call.filterId, call.level));
    await vi.advanceTimersByTimeAsync(1);
    expect(controller.getState().tiles.map((t) => t.filterId)).toEqual(["gauss", "wls"]);

    controller.toggleFilter("gauss");
    expect(controller.getState().tiles.map((t) => t.filterId)).toEqual(["wls"]);

    // a late response for the removed filter must not resurrect the tile
    controller.setLevel(0.6);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    expect(mock.calls.filter((c) => c.level === 0.6).map((c) => c.filterId)).toEqual(["wls"]);
  });

  it("per-filter failures show an inline error tile without blocking others", async () => {
    await start();
    controller.toggleFilter("gauss");
    controller.toggleFilter("wls");
    controller.setLevel(0.5);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    const gaussCall = mock.calls.find((c) => c.filterId === "gauss")!;
    const wlsCall = mock.calls.find((c) => c.filterId === "wls")!;
    gaussCall.reject(new Error("filter failed: boom"));
    wlsCall.resolve(makeResponse("wls", 0.5));
    await vi.advanceTimersByTimeAsync(1);
    const tiles = controller.getState().tiles;
    expect(tiles.find((t) => t.filterId === "gauss")?.status).toBe("error");
    expect(tiles.find((t) => t.filterId === "gauss")?.error).toContain("boom");
    expect(tiles.find((t) => t.filterId === "wls")?.status).toBe("ready");
  });

  it("a second upload discards the previous session's view", async () => {
    await start();
    controller.toggleFilter("gauss");
    controller.setLevel(0.5);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    mock.calls.shift()!.resolve(makeResponse("gauss", 0.5));
    await vi.advanceTimersByTimeAsync(1);
    expect(controller.getState().fetched.size).toBe(1);

    await controller.upload(new Blob([new Uint8Array([2])]), "y.png");
    const state = controller.getState();
    expect(state.session?.session_id).toBe("s2");
    expect(state.fetched.size).toBe(0);
    expect(state.level).toBe(0);
    expect(state.tiles.every((t) => t.status === "loading" || t.level === 0)).toBe(true);
  });

  it("non-converged responses are exposed for warning badges", async () => {
    await start();
    controller.toggleFilter("gif");
    controller.setLevel(0.5);
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    mock.calls[0].resolve(
      makeResponse("gif", 0.5, { converged: false, deviation: 0.04, achieved_level: 0.54 }),
    );
    await vi.advanceTimersByTimeAsync(1);
    const tile = controller.getState().tiles[0];
    expect(tile.response?.match.converged).toBe(false);
    expect(tile.response?.match.achieved_level).toBe(0.54);
  });
});
