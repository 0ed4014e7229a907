import { ApiClient, ApiError, isJobTicket } from "../api";
import type { StudioState } from "../state";
import type { GuidedResponse, ModelInfo, RandomResponse } from "../types";

export type Notice = (message: string) => void;

/** Random silhouette/character generation panel. */
export class RandomPanel {
  countInput: HTMLInputElement;
  psiInput: HTMLInputElement;
  classSelect: HTMLSelectElement;
  autoColorize: HTMLInputElement;
  button: HTMLButtonElement;
  private models: ModelInfo[] = [];

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private state: StudioState,
    private notify: Notice,
  ) {
    this.root.innerHTML = `
      <h2>Random generation</h2>
      <label>Count <input type="number" name="count" value="3" min="1" max="16"></label>
      <label>Psi <input type="number" name="psi" value="0.75" min="0" max="1.5" step="0.05"></label>
      <label class="class-row">Class <select name="class"><option value="">all</option></select></label>
      <label><input type="checkbox" name="autocolor"> auto-colorize</label>
      <button name="generate">Generate silhouettes</button>
    `;
    this.countInput = this.root.querySelector('[name="count"]')!;
    this.psiInput = this.root.querySelector('[name="psi"]')!;
    this.classSelect = this.root.querySelector('[name="class"]')!;
    this.autoColorize = this.root.querySelector('[name="autocolor"]')!;
    this.button = this.root.querySelector('[name="generate"]')!;
    this.button.addEventListener("click", () => void this.generate());
  }

  setModels(models: ModelInfo[]): void {
    this.models = models;
    const current = this.models.find((m) => m.model_id === this.state.selectedModel);
    this.classSelect.replaceChildren();
    const any = document.createElement("option");
    any.value = "";
    any.textContent = "all";
    this.classSelect.append(any);
    if (current?.conditional && current.classes) {
      current.classes.forEach((name, i) => {
        const opt = document.createElement("option");
        opt.value = String(i);
        opt.textContent = name;
        this.classSelect.append(opt);
      });
    }
  }

  async generate(): Promise<number> {
    if (!this.state.selectedModel) {
      this.notify("select a model first");
      return 0;
    }
    const count = Number(this.countInput.value);
    const psi = Number(this.psiInput.value);
    const classIndex = this.classSelect.value === "" ? null : Number(this.classSelect.value);
    try {
      const resp: RandomResponse = await this.api.generateRandom({
        model_id: this.state.selectedModel,
        count,
        psi,
        class_index: classIndex,
        session_id: this.state.sessionId,
      });
      this.state.setSession(resp.session_id);
      const added = this.state.addGenerated(resp.items, "random");
      if (added < resp.items.length) {
        this.notify("duplicate results highlighted, not re-added");
      }
      if (this.autoColorize.checked) {
        await this.colorizeAll(resp);
      }
      return resp.items.length;
    } catch (err) {
      this.notify(err instanceof ApiError ? `server: ${err.message}` : String(err));
      return 0;
    }
  }

  private async colorizeAll(resp: RandomResponse): Promise<void> {
    for (const item of resp.items) {
      const result = await this.api.generateGuidedByHash(
        item.hash,
        "silhouette_to_character",
        this.state.sessionId,
      );
      const guided = isJobTicket(result)
        ? await this.api.awaitJob<GuidedResponse>(result.job_id)
        : result;
      const hash = guided.enhanced.replace("/img/", "").replace(".png", "");
      this.state.addItem({
        hash,
        imageUrl: guided.enhanced,
        latentId: guided.latent_id,
        provenance: "guided",
      });
    }
  }
}
