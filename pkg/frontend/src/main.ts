import { ApiClient } from "./api";
import { ExplorerPanel } from "./panels/explorer";
import { GalleryPanel } from "./panels/gallery";
import { GuidedPanel } from "./panels/guided";
import { RandomPanel } from "./panels/random";
import { fragmentForSession, sessionFromFragment } from "./session";
import { StudioState } from "./state";

function notice(el: HTMLElement): (msg: string) => void {
  return (msg) => {
    el.textContent = msg;
    el.classList.add("visible");
    setTimeout(() => el.classList.remove("visible"), 4000);
  };
}

export async function boot(doc: Document, api = new ApiClient()): Promise<StudioState> {
  const state = new StudioState();
  const noticeEl = doc.querySelector<HTMLElement>("#notice")!;
  const notify = notice(noticeEl);

  const modelSelect = doc.querySelector<HTMLSelectElement>("#model-select")!;
  const random = new RandomPanel(doc.querySelector("#random-panel")!, api, state, notify);
  new GuidedPanel(doc.querySelector("#guided-panel")!, api, state, notify);
  new ExplorerPanel(doc.querySelector("#explorer-panel")!, api, state, notify);
  new GalleryPanel(doc.querySelector("#gallery")!, api, state);

  try {
    const models = await api.listModels();
    modelSelect.replaceChildren();
    for (const m of models.models) {
      const opt = doc.createElement("option");
      opt.value = m.model_id;
      opt.textContent = `${m.model_id} (${m.family ?? "?"} ${m.resolution ?? ""})`;
      modelSelect.append(opt);
    }
    const preferred = models.pipeline.silhouette ?? models.models[0]?.model_id;
    if (preferred) {
      modelSelect.value = preferred;
      state.setModel(preferred);
    }
    random.setModels(models.models);
    modelSelect.addEventListener("change", () => {
      state.setModel(modelSelect.value);
      random.setModels(models.models);
    });
  } catch (err) {
    notify(`cannot reach the studio service: ${String(err)}`);
  }

  // restore a bookmarked session from the server journal
  const sessionId = sessionFromFragment(doc.location?.hash ?? "");
  if (sessionId) {
    try {
      const session = await api.getSession(sessionId);
      state.setSession(sessionId);
      state.restoreFromEvents(session.events);
    } catch {
      notify(`session ${sessionId} not found on the server`);
    }
  }
  state.subscribe((s) => {
    if (s.sessionId && doc.location) {
      doc.location.hash = fragmentForSession(s.sessionId);
    }
  });
  return state;
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.body?.dataset.autoboot !== "off") {
  void boot(document);
}
