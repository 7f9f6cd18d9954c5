import { ApiClient } from "./api.js";
import type {
  FilterInfo,
  Layout,
  MatchResponse,
  SessionInfo,
  TileState,
} from "./types.js";

export const DEBOUNCE_MS = 250;

/** Levels are cached server-side at millisecond-of-level granularity. */
export function levelKey(level: number): string {
  return level.toFixed(3);
}

export interface ViewState {
  session: SessionInfo | null;
  filters: FilterInfo[];
  selected: string[];
  level: number;
  layout: Layout;
  tiles: TileState[];
  banner: string | null;
  originalUrl: string | null;
  /** every fetched result, keyed `${filterId}@${levelKey}`, for the chart */
  fetched: Map<string, MatchResponse>;
}

type Listener = (state: ViewState) => void;

/**
 * Explorer state machine. Slider moves debounce into one request burst per
 * selected filter; responses tagged with a superseded level are discarded,
 * so the panel always reflects the latest slider value. All displayed
 * numbers pass through from server payloads untouched.
 */
export class ExplorerController {
  private state: ViewState = {
    session: null,
    filters: [],
    selected: [],
    level: 0,
    layout: "grid",
    tiles: [],
    banner: null,
    originalUrl: null,
    fetched: new Map(),
  };
  private listeners: Listener[] = [];
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private pendingTargets: string[] | null = null; // null = every selected filter
  private tilesByFilter = new Map<string, TileState>();

  constructor(
    private readonly api: ApiClient,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    this.state = { ...this.state, tiles: this.orderedTiles() };
    for (const l of this.listeners) l(this.state);
  }

  private orderedTiles(): TileState[] {
    return this.state.selected
      .map((id) => this.tilesByFilter.get(id))
      .filter((t): t is TileState => t !== undefined);
  }

  async loadFilters(): Promise<void> {
    try {
      this.state.filters = await this.api.listFilters();
    } catch (err) {
      this.state.banner = `cannot load filter list: ${(err as Error).message}`;
    }
    this.emit();
  }

  async upload(file: Blob, name?: string): Promise<void> {
    let session: SessionInfo;
    try {
      session = await this.api.createSession(file, name);
    } catch (err) {
      // no partial state: keep whatever session was active before
      this.state.banner = `upload failed: ${(err as Error).message}`;
      this.emit();
      return;
    }
    // a new session discards the previous one from the view entirely
    this.cancelPendingBurst();
    this.tilesByFilter.clear();
    this.state = {
      ...this.state,
      session,
      level: 0,
      banner: null,
      originalUrl: this.api.imageUrl(session.session_id, "input"),
      fetched: new Map(),
    };
    this.emit();
    if (this.state.selected.length) this.scheduleBurst();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.emit();
  }

  setLayout(layout: Layout): void {
    this.state.layout = layout;
    this.emit();
  }

  setLevel(level: number): void {
    this.state.level = level;
    this.emit();
    if (this.state.session) this.scheduleBurst();
  }

  toggleFilter(filterId: string): void {
    const selected = this.state.selected;
    if (selected.includes(filterId)) {
      this.state.selected = selected.filter((id) => id !== filterId);
      this.tilesByFilter.delete(filterId);
      this.emit();
      return;
    }
    this.state.selected = [...selected, filterId];
    this.emit();
    if (this.state.session) this.scheduleBurst([filterId]);
  }

  private cancelPendingBurst(): void {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    this.pendingTargets = null;
  }

  private scheduleBurst(only?: string[]): void {
    if (this.debounceTimer === null) {
      this.pendingTargets = only ? [...only] : null;
    } else {
      clearTimeout(this.debounceTimer);
      // merge with the pending burst; null already means "all selected"
      if (only === undefined) {
        this.pendingTargets = null;
      } else if (this.pendingTargets !== null) {
        for (const id of only) {
          if (!this.pendingTargets.includes(id)) this.pendingTargets.push(id);
        }
      }
    }
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      const targets = this.pendingTargets;
      this.pendingTargets = null;
      this.fireBurst(targets ?? undefined);
    }, this.debounceMs);
  }

  private fireBurst(only?: string[]): void {
    const session = this.state.session;
    if (!session) return;
    const level = this.state.level;
    const targets = only ?? this.state.selected;
    for (const filterId of targets) {
      if (!this.state.selected.includes(filterId)) continue;
      this.tilesByFilter.set(filterId, { filterId, level, status: "loading" });
      void this.requestMatch(session.session_id, filterId, level);
    }
    this.emit();
  }

  private async requestMatch(sessionId: string, filterId: string, level: number): Promise<void> {
    let response: MatchResponse | null = null;
    let error: string | null = null;
    try {
      response = await this.api.match(sessionId, filterId, level);
    } catch (err) {
      error = (err as Error).message;
    }
    if (!this.isCurrent(sessionId, filterId, level)) {
      return; // stale: a newer slider value or session superseded this request
    }
    if (response) {
      this.state.fetched.set(`${filterId}@${levelKey(level)}`, response);
      this.tilesByFilter.set(filterId, {
        filterId,
        level,
        status: "ready",
        response,
      });
    } else {
      this.tilesByFilter.set(filterId, {
        filterId,
        level,
        status: "error",
        error: error ?? "unknown error",
      });
    }
    this.emit();
  }

  private isCurrent(sessionId: string, filterId: string, level: number): boolean {
    return (
      this.state.session !== null &&
      this.state.session.session_id === sessionId &&
      this.state.selected.includes(filterId) &&
      levelKey(this.state.level) === levelKey(level)
    );
  }
}
