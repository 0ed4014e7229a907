// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { ExplorerPanel } from "../src/panels/explorer";
import { GalleryPanel } from "../src/panels/gallery";
import { GuidedPanel } from "../src/panels/guided";
import { RandomPanel } from "../src/panels/random";
import { StudioState } from "../src/state";
import { FakeServer } from "./fakeServer";

let server: FakeServer;
let api: ApiClient;
let state: StudioState;
let notices: string[];

function panelRoot(): HTMLElement {
  const el = document.createElement("section");
  document.body.append(el);
  return el;
}

beforeEach(() => {
  document.body.innerHTML = "";
  server = new FakeServer();
  api = new ApiClient("", server.fetch);
  state = new StudioState();
  state.setModel("sil-dc");
  state.setSession("fake-session");
  notices = [];
});

describe("RandomPanel", () => {
  it("renders the requested count of thumbnails", async () => {
    const galleryEl = panelRoot();
    new GalleryPanel(galleryEl, api, state);
    const panel = new RandomPanel(panelRoot(), api, state, (m) => notices.push(m));
    panel.countInput.value = "3";
    const produced = await panel.generate();
    expect(produced).toBe(3);
    expect(galleryEl.querySelectorAll(".thumb")).toHaveLength(3);
  });

  it("highlights duplicates instead of re-adding", async () => {
    const panel = new RandomPanel(panelRoot(), api, state, (m) => notices.push(m));
    panel.countInput.value = "2";
    // same explicit seed twice -> identical hashes from the server
    (panel as unknown as { seedOverride?: number }).seedOverride = 7;
    await api
      .generateRandom({ model_id: "sil-dc", count: 2, seed: 7, session_id: "fake-session" })
      .then((r) => state.addGenerated(r.items, "random"));
    const before = state.gallery.length;
    await api
      .generateRandom({ model_id: "sil-dc", count: 2, seed: 7, session_id: "fake-session" })
      .then((r) => state.addGenerated(r.items, "random"));
    expect(state.gallery.length).toBe(before);
  });

  it("shows a notice and keeps the gallery on server errors", async () => {
    const panel = new RandomPanel(panelRoot(), api, state, (m) => notices.push(m));
    server.failNext = { status: 503, detail: "offline" };
    const produced = await panel.generate();
    expect(produced).toBe(0);
    expect(state.gallery).toHaveLength(0);
    expect(notices.some((n) => n.includes("offline"))).toBe(true);
  });
});

describe("GuidedPanel", () => {
  it("shows exactly two result cards", async () => {
    const root = panelRoot();
    const panel = new GuidedPanel(root, api, state, (m) => notices.push(m));
    state.selectLatent("l0", "somehash");
    const guided = await panel.submit();
    expect(guided).not.toBeNull();
    expect(root.querySelectorAll(".result-card")).toHaveLength(2);
  });

  it("sends the gallery hash instead of re-uploading bytes", async () => {
    const panel = new GuidedPanel(panelRoot(), api, state, (m) => notices.push(m));
    state.selectLatent("l0", "deadbeef");
    await panel.submit();
    const req = server.requests.find((r) => r.url.includes("guided"));
    expect(req).toBeDefined();
    expect((req!.body as Record<string, unknown>).source_hash).toBe("deadbeef");
    expect((req!.body as Record<string, unknown>).file).toBeUndefined();
  });

  it("asks for input when nothing is selected", async () => {
    const panel = new GuidedPanel(panelRoot(), api, state, (m) => notices.push(m));
    const out = await panel.submit();
    expect(out).toBeNull();
    expect(notices[0]).toMatch(/choose a PNG/);
  });
});

describe("ExplorerPanel", () => {
  async function seedLatent(): Promise<{ hash: string; latentId: string }> {
    const resp = await api.generateRandom({
      model_id: "sil-dc",
      count: 1,
      seed: 42,
      session_id: "fake-session",
    });
    state.addGenerated(resp.items, "random");
    const item = resp.items[0];
    state.selectLatent(item.latent_id, item.hash);
    return { hash: item.hash, latentId: item.latent_id };
  }

  it("psi slider round trip reproduces the original frame hash", async () => {
    const panel = new ExplorerPanel(panelRoot(), api, state, (m) => notices.push(m), 0);
    const { hash } = await seedLatent();
    const away = await panel.sendEdits([{ kind: "psi", value: 1.2 }]);
    expect(away[0].hash).not.toBe(hash);
    // slide back to the original value: identical render
    const back = await panel.sendEdits([{ kind: "psi", value: 0.75 }]);
    expect(back[0].hash).toBe(hash);
  });

  it("interpolation fills a filmstrip with endpoint-matching frames", async () => {
    const root = panelRoot();
    const panel = new ExplorerPanel(root, api, state, (m) => notices.push(m), 0);
    const a = await seedLatent();
    const respB = await api.generateRandom({
      model_id: "sil-dc",
      count: 1,
      seed: 99,
      session_id: "fake-session",
    });
    state.addGenerated(respB.items, "random");
    const b = respB.items[0];
    const frames = await panel.sendEdits([{ kind: "interp_target", value: b.latent_id }], 5);
    expect(frames).toHaveLength(5);
    expect(frames[0].hash).toBe(a.hash);
    expect(frames[4].hash).toBe(b.hash);
    expect(root.querySelectorAll(".frame")).toHaveLength(5);
  });

  it("perturb with sigma zero returns the identical frame", async () => {
    const panel = new ExplorerPanel(panelRoot(), api, state, (m) => notices.push(m), 0);
    const { hash } = await seedLatent();
    const frames = await panel.sendEdits([{ kind: "perturb", value: 0 }]);
    expect(frames[0].hash).toBe(hash);
  });

  it("debounces rapid slider drags to the trailing request", async () => {
    const panel = new ExplorerPanel(panelRoot(), api, state, (m) => notices.push(m), 30);
    await seedLatent();
    const before = server.requests.filter((r) => r.url.includes("explore")).length;
    for (const v of ["0.9", "1.0", "1.1", "1.2"]) {
      panel.psiSlider.value = v;
      panel.psiSlider.dispatchEvent(new Event("input"));
    }
    await new Promise((r) => setTimeout(r, 120));
    const after = server.requests.filter((r) => r.url.includes("explore")).length;
    expect(after - before).toBe(1);
    const last = server.requests.at(-1)!.body as { edits: { value: number }[] };
    expect(last.edits[0].value).toBeCloseTo(1.2);
  });

  it("promoting a frame makes it the active latent", async () => {
    const root = panelRoot();
    const panel = new ExplorerPanel(root, api, state, (m) => notices.push(m), 0);
    await seedLatent();
    const frames = await panel.sendEdits([{ kind: "psi", value: 1.3 }]);
    const frameEl = root.querySelector<HTMLImageElement>(".frame")!;
    frameEl.click();
    expect(state.activeLatent).toBe(frames[0].latent_id);
    expect(state.gallery.some((g) => g.hash === frames[0].hash)).toBe(true);
  });
});

describe("session restore", () => {
  it("page reload rebuilds the gallery from the server journal", async () => {
    // first "visit": produce some work
    await api
      .generateRandom({ model_id: "sil-dc", count: 2, seed: 5, session_id: "fake-session" })
      .then((r) => state.addGenerated(r.items, "random"));
    const hashesBefore = state.gallery.map((g) => g.hash);

    // "reload": a fresh state hydrated from GET /sessions/{id}
    const fresh = new StudioState();
    const session = await api.getSession("fake-session");
    fresh.restoreFromEvents(session.events);
    expect(fresh.gallery.map((g) => g.hash)).toEqual(hashesBefore);
  });

  it("missing sessions surface a 404", async () => {
    await expect(api.getSession("missing")).rejects.toMatchObject({ status: 404 });
  });
});
