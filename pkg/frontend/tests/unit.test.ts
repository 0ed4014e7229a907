import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { Debouncer } from "../src/debounce";
import { hashFromUrl } from "../src/panels/guided";
import { fragmentForSession, sessionFromFragment } from "../src/session";
import { StudioState } from "../src/state";
import { FakeServer } from "./fakeServer";

describe("ApiClient", () => {
  it("decodes successful JSON responses", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);
    const models = await api.listModels();
    expect(models.models[0].model_id).toBe("sil-dc");
  });

  it("maps HTTP errors to ApiError with the server detail", async () => {
    const server = new FakeServer();
    server.failNext = { status: 422, detail: "count must lie in [1, 16]" };
    const api = new ApiClient("", server.fetch);
    await expect(api.generateRandom({ model_id: "sil-dc", count: 0 })).rejects.toMatchObject({
      name: "ApiError",
      status: 422,
      message: "count must lie in [1, 16]",
    });
  });

  it("maps network failures to status 0", async () => {
    const api = new ApiClient("", () => Promise.reject(new Error("refused")));
    await expect(api.listModels()).rejects.toMatchObject({ status: 0 });
    expect(new ApiError(0, "x")).toBeInstanceOf(Error);
  });
});

describe("Debouncer", () => {
  it("collapses rapid calls to the trailing one", async () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const d = new Debouncer<string>(100);
    d.run("psi", () => calls.push(1));
    d.run("psi", () => calls.push(2));
    d.run("psi", () => calls.push(3));
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });

  it("keeps independent keys independent", () => {
    vi.useFakeTimers();
    const calls: string[] = [];
    const d = new Debouncer<string>(50);
    d.run("a", () => calls.push("a"));
    d.run("b", () => calls.push("b"));
    vi.advanceTimersByTime(80);
    expect(calls.sort()).toEqual(["a", "b"]);
    vi.useRealTimers();
  });
});

describe("StudioState", () => {
  it("dedups gallery items by hash", () => {
    const s = new StudioState();
    expect(s.addItem({ hash: "h1", imageUrl: "/img/h1.png", latentId: "l1", provenance: "random" })).toBe(true);
    expect(s.addItem({ hash: "h1", imageUrl: "/img/h1.png", latentId: "l1", provenance: "random" })).toBe(false);
    expect(s.gallery).toHaveLength(1);
  });

  it("restores gallery from journal events", () => {
    const s = new StudioState();
    const added = s.restoreFromEvents([
      {
        ts: 0,
        kind: "generate_random",
        outputs: ["aa", "bb"],
        latents: [
          { latent_id: "l1", model_id: "m", latent: {} },
          { latent_id: "l2", model_id: "m", latent: {} },
        ],
      },
    ]);
    expect(added).toBe(2);
    expect(s.gallery.map((g) => g.latentId)).toEqual(["l1", "l2"]);
    expect(s.gallery[0].provenance).toBe("restored");
  });

  it("notifies subscribers", () => {
    const s = new StudioState();
    const seen: (string | null)[] = [];
    s.subscribe((st) => seen.push(st.selectedModel));
    s.setModel("m1");
    expect(seen).toEqual(["m1"]);
  });
});

describe("session fragment", () => {
  it("round-trips the session id", () => {
    expect(sessionFromFragment(fragmentForSession("abc-123"))).toBe("abc-123");
    expect(sessionFromFragment("#other")).toBeNull();
    expect(sessionFromFragment("")).toBeNull();
  });
});

describe("hashFromUrl", () => {
  it("extracts the content hash", () => {
    expect(hashFromUrl("/img/0123abcd.png")).toBe("0123abcd");
  });
});
