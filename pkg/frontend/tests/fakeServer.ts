/** Deterministic in-memory stand-in for the studio service.
 * Hashes derive from (model, latent state), so identical requests
 * reproduce identical hashes — the property the round-trip tests rely on. */

import type { SessionEvent } from "../src/types";

interface LatentState {
  latentId: string;
  modelId: string;
  seed: number;
  psi: number;
  perturbTag: string;
}

function fnv(text: string): string {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h.toString(16).padStart(8, "0").repeat(8).slice(0, 64);
}

export class FakeServer {
  latents = new Map<string, LatentState>();
  events: SessionEvent[] = [];
  requests: { url: string; body: unknown }[] = [];
  failNext: { status: number; detail: string } | null = null;

  private hashFor(state: LatentState): string {
    return fnv(
      JSON.stringify([state.modelId, state.seed, state.psi, state.perturbTag]),
    );
  }

  private mint(state: Omit<LatentState, "latentId">): LatentState {
    const latentId = fnv(JSON.stringify([state.seed, state.psi, state.perturbTag])).slice(0, 16);
    const full = { ...state, latentId };
    this.latents.set(latentId, full);
    return full;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body instanceof FormData
      ? Object.fromEntries((init.body as FormData).entries())
      : init?.body
        ? JSON.parse(init.body as string)
        : null;
    this.requests.push({ url, body });
    if (this.failNext) {
      const { status, detail } = this.failNext;
      this.failNext = null;
      return new Response(JSON.stringify({ detail }), { status });
    }
    if (url.endsWith("/api/v1/models")) {
      return this.json({
        models: [
          { model_id: "sil-dc", loaded: true, family: "dcgan", resolution: 32, conditional: false },
        ],
        pipeline: { silhouette: "sil-dc", translator: "p2p", style: "style-color" },
      });
    }
    if (url.includes("/api/v1/generate/random")) {
      const req = body as { model_id: string; count: number; psi?: number; seed?: number; session_id?: string };
      const seed = req.seed ?? 1234;
      const items = [];
      const latents = [];
      for (let i = 0; i < req.count; i++) {
        const state = this.mint({
          modelId: req.model_id,
          seed: seed + i,
          psi: req.psi ?? 0.75,
          perturbTag: "",
        });
        const hash = this.hashFor(state);
        items.push({ image_url: `/img/${hash}.png`, hash, latent_id: state.latentId });
        latents.push({ latent_id: state.latentId, model_id: state.modelId, latent: {} });
      }
      const sessionId = req.session_id ?? "fake-session";
      this.events.push({
        ts: this.events.length,
        kind: "generate_random",
        outputs: items.map((i) => i.hash),
        latents,
      });
      return this.json({ items, seed, session_id: sessionId });
    }
    if (url.includes("/api/v1/generate/guided")) {
      const form = body as Record<string, unknown>;
      const source = String(form.source_hash ?? "upload");
      const plainHash = fnv(`plain:${source}`);
      const enhancedHash = fnv(`enhanced:${source}`);
      const state = this.mint({ modelId: "style-color", seed: 0, psi: 1.0, perturbTag: source });
      this.events.push({
        ts: this.events.length,
        kind: "generate_guided",
        outputs: [plainHash, enhancedHash],
        latents: [{ latent_id: state.latentId, model_id: "style-color", latent: {} }],
      });
      return this.json({
        plain: `/img/${plainHash}.png`,
        enhanced: `/img/${enhancedHash}.png`,
        latent_id: state.latentId,
        low_confidence: false,
        session_id: (form.session_id as string) ?? "fake-session",
      });
    }
    if (url.includes("/api/v1/latent/explore")) {
      const req = body as {
        latent_id: string;
        edits: { kind: string; value: number | string }[];
        steps: number;
        session_id?: string;
      };
      const base = this.latents.get(req.latent_id);
      if (!base) return new Response(JSON.stringify({ detail: "unknown latent" }), { status: 404 });
      const frames = [];
      const latents = [];
      let current = base;
      for (const edit of req.edits) {
        const produced: LatentState[] = [];
        if (edit.kind === "psi") {
          produced.push(this.mint({ ...current, psi: Number(edit.value) }));
        } else if (edit.kind === "perturb") {
          const sigma = Number(edit.value);
          produced.push(
            sigma === 0
              ? this.mint({ ...current })
              : this.mint({ ...current, perturbTag: `${current.perturbTag}+p${sigma}` }),
          );
        } else if (edit.kind === "interp_target") {
          const other = this.latents.get(String(edit.value));
          if (!other) return new Response(JSON.stringify({ detail: "unknown target" }), { status: 422 });
          for (let s = 0; s < req.steps; s++) {
            const t = s / (req.steps - 1);
            produced.push(
              t === 0 ? this.mint({ ...current }) : t === 1 ? this.mint({ ...other }) : this.mint({
                ...current,
                perturbTag: `lerp${t.toFixed(2)}:${other.latentId}`,
              }),
            );
          }
        } else {
          return new Response(JSON.stringify({ detail: "unknown edit" }), { status: 422 });
        }
        for (const state of produced) {
          const hash = this.hashFor(state);
          frames.push({ image_url: `/img/${hash}.png`, hash, latent_id: state.latentId });
          latents.push({ latent_id: state.latentId, model_id: state.modelId, latent: {} });
        }
        current = produced[produced.length - 1];
      }
      this.events.push({
        ts: this.events.length,
        kind: "latent_explore",
        outputs: frames.map((f) => f.hash),
        latents,
      });
      return this.json({ frames, session_id: req.session_id ?? "fake-session" });
    }
    if (url.includes("/api/v1/sessions/")) {
      const id = url.split("/").pop()!;
      if (id === "missing") {
        return new Response(JSON.stringify({ detail: "unknown session" }), { status: 404 });
      }
      return this.json({ session_id: id, events: this.events });
    }
    return new Response(JSON.stringify({ detail: "no route" }), { status: 404 });
  };

  private json(doc: unknown): Response {
    return new Response(JSON.stringify(doc), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }
}
