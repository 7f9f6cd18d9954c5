import type { FilterInfo, MatchResponse, SessionInfo } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function errorMessage(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { error?: string };
    if (body && body.error) return body.error;
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${res.status}`;
}

/** Thin typed client over the explorer HTTP API; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listFilters(): Promise<FilterInfo[]> {
    const res = await this.fetchImpl(this.url("/api/filters"));
    if (!res.ok) throw new ApiError(await errorMessage(res), res.status);
    return (await res.json()) as FilterInfo[];
  }

  async createSession(file: Blob, name = "upload.png"): Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", file, name);
    const res = await this.fetchImpl(this.url("/api/session"), {
      method: "POST",
      body: form,
    });
    if (!res.ok) throw new ApiError(await errorMessage(res), res.status);
    return (await res.json()) as SessionInfo;
  }

  async match(sessionId: string, filterId: string, level: number): Promise<MatchResponse> {
    const res = await this.fetchImpl(this.url("/api/match"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, filter_id: filterId, level }),
    });
    if (!res.ok) throw new ApiError(await errorMessage(res), res.status);
    return (await res.json()) as MatchResponse;
  }

  imageUrl(sessionId: string, key: string): string {
    return this.url(`/api/image/${sessionId}/${encodeURIComponent(key)}`);
  }

  absolute(path: string): string {
    return this.url(path);
  }
}
