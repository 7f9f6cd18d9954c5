export interface FilterInfo {
  id: string;
  param_name: string;
  param_max: number;
  monotone: boolean;
  kind: string;
}

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
  scale: number;
}

export interface MatchInfo {
  filter_id: string;
  target: number;
  param: number;
  normalized_param: number;
  achieved_level: number;
  deviation: number;
  evaluations: number;
  converged: boolean;
}

export interface AttributeValues {
  so: number;
  so_smooth: number;
  so_edge: number;
  delta_l: number;
  delta_c: number;
  contrast_ratio: number;
}

export interface MatchResponse {
  match: MatchInfo;
  report: AttributeValues;
  image_url: string;
  cached: boolean;
}

export type Layout = "strip" | "grid" | "wipe";

export type TileStatus = "loading" | "ready" | "error";

export interface TileState {
  filterId: string;
  level: number;
  status: TileStatus;
  response?: MatchResponse;
  error?: string;
}
