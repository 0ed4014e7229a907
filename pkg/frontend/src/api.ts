import type {
  ExploreEdit,
  ExploreResponse,
  GuidedResponse,
  JobResponse,
  ModelsResponse,
  RandomResponse,
  SessionResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Typed client for the studio service; every call surfaces HTTP errors as ApiError. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  imageUrl(path: string): string {
    return this.baseUrl + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // non-JSON error bodies fall through with a generic message
    }
    if (!resp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  listModels(): Promise<ModelsResponse> {
    return this.request("/api/v1/models");
  }

  getSession(sessionId: string): Promise<SessionResponse> {
    return this.request(`/api/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  getJob(jobId: string): Promise<JobResponse> {
    return this.request(`/api/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  generateRandom(req: {
    model_id: string;
    count: number;
    class_index?: number | null;
    psi?: number;
    seed?: number | null;
    session_id?: string | null;
  }): Promise<RandomResponse> {
    return this.request("/api/v1/generate/random", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  generateGuided(
    file: Blob,
    mode: "silhouette_to_character" | "image_to_silhouette",
    sessionId?: string | null,
    fileName = "upload.png",
  ): Promise<GuidedResponse | { job_id: string; poll: string }> {
    const form = new FormData();
    form.append("file", file, fileName);
    form.append("mode", mode);
    if (sessionId) form.append("session_id", sessionId);
    return this.request("/api/v1/generate/guided", { method: "POST", body: form });
  }

  /** Gallery images are already server-side: send their hash, not bytes. */
  generateGuidedByHash(
    sourceHash: string,
    mode: "silhouette_to_character" | "image_to_silhouette",
    sessionId?: string | null,
  ): Promise<GuidedResponse | { job_id: string; poll: string }> {
    const form = new FormData();
    form.append("source_hash", sourceHash);
    form.append("mode", mode);
    if (sessionId) form.append("session_id", sessionId);
    return this.request("/api/v1/generate/guided", { method: "POST", body: form });
  }

  explore(req: {
    latent_id: string;
    edits: ExploreEdit[];
    steps?: number;
    seed?: number | null;
    session_id?: string | null;
  }): Promise<ExploreResponse> {
    return this.request("/api/v1/latent/explore", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  /** Poll a deferred job until it settles; resolves with its result payload. */
  async awaitJob<T>(jobId: string, intervalMs = 250, maxTries = 240): Promise<T> {
    for (let i = 0; i < maxTries; i++) {
      const job = await this.getJob(jobId);
      if (job.status === "done") return job.result as T;
      if (job.status === "error") throw new ApiError(500, job.error ?? "job failed");
      await new Promise((r) => setTimeout(r, intervalMs));
    }
    throw new ApiError(504, "job polling timed out");
  }
}

export function isJobTicket(value: unknown): value is { job_id: string; poll: string } {
  return typeof value === "object" && value !== null && "job_id" in value;
}
