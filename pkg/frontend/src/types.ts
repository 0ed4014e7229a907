/** Wire types mirroring the studio service JSON. */

export interface ModelInfo {
  model_id: string;
  loaded: boolean;
  family?: string;
  resolution?: number;
  conditional?: boolean;
  num_classes?: number;
  channels?: number;
  classes?: string[];
}

export interface ModelsResponse {
  models: ModelInfo[];
  pipeline: { silhouette?: string | null; translator?: string | null; style?: string | null };
}

export interface GeneratedItem {
  image_url: string;
  hash: string;
  latent_id: string;
}

export interface RandomResponse {
  items: GeneratedItem[];
  seed: number;
  session_id: string;
}

export interface GuidedResponse {
  plain: string;
  enhanced: string;
  latent_id: string | null;
  low_confidence: boolean | null;
  session_id: string;
}

export interface ExploreFrame {
  image_url: string;
  hash: string;
  latent_id: string;
}

export interface ExploreResponse {
  frames: ExploreFrame[];
  session_id: string;
}

export interface SessionEvent {
  ts: number;
  kind: string;
  outputs: string[];
  latents: { latent_id: string; model_id: string; latent: Record<string, unknown> }[];
  [key: string]: unknown;
}

export interface SessionResponse {
  session_id: string;
  events: SessionEvent[];
}

export interface JobResponse {
  job_id: string;
  status: "pending" | "done" | "error";
  result: Record<string, unknown> | null;
  error: string | null;
}

export type ExploreEdit =
  | { kind: "psi"; value: number }
  | { kind: "perturb"; value: number }
  | { kind: "interp_target"; value: string };
