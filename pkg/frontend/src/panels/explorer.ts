import { ApiClient, ApiError } from "../api";
import { Debouncer } from "../debounce";
import type { StudioState } from "../state";
import type { ExploreEdit, ExploreFrame } from "../types";
import type { Notice } from "./random";

/** Latent explorer: psi slider, perturb slider, interpolation picker, filmstrip. */
export class ExplorerPanel {
  psiSlider: HTMLInputElement;
  sigmaSlider: HTMLInputElement;
  perturbButton: HTMLButtonElement;
  interpSelect: HTMLSelectElement;
  interpButton: HTMLButtonElement;
  filmstrip: HTMLElement;
  debouncer: Debouncer<string>;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private state: StudioState,
    private notify: Notice,
    debounceMs = 250,
  ) {
    this.debouncer = new Debouncer(debounceMs);
    this.root.innerHTML = `
      <h2>Latent exploration</h2>
      <label>psi <input type="range" name="psi" min="0" max="1.5" step="0.05" value="0.75">
        <span class="psi-value">0.75</span></label>
      <label>perturb sigma <input type="range" name="sigma" min="0" max="1" step="0.05" value="0.1">
        <span class="sigma-value">0.1</span></label>
      <button name="perturb">Perturb</button>
      <label>interpolate toward <select name="interp"></select></label>
      <button name="interp-go">Interpolate</button>
      <div class="filmstrip"></div>
    `;
    this.psiSlider = this.root.querySelector('[name="psi"]')!;
    this.sigmaSlider = this.root.querySelector('[name="sigma"]')!;
    this.perturbButton = this.root.querySelector('[name="perturb"]')!;
    this.interpSelect = this.root.querySelector('[name="interp"]')!;
    this.interpButton = this.root.querySelector('[name="interp-go"]')!;
    this.filmstrip = this.root.querySelector(".filmstrip")!;

    this.psiSlider.addEventListener("input", () => {
      const value = Number(this.psiSlider.value);
      this.root.querySelector(".psi-value")!.textContent = value.toFixed(2);
      this.state.setExplorer({ psi: value });
      this.debouncer.run("psi", () => void this.sendEdits([{ kind: "psi", value }]));
    });
    this.sigmaSlider.addEventListener("input", () => {
      const value = Number(this.sigmaSlider.value);
      this.root.querySelector(".sigma-value")!.textContent = value.toFixed(2);
      this.state.setExplorer({ sigma: value });
    });
    this.perturbButton.addEventListener("click", () => {
      const value = this.state.explorer.sigma;
      this.debouncer.run("perturb", () => void this.sendEdits([{ kind: "perturb", value }]));
    });
    this.interpButton.addEventListener("click", () => {
      const target = this.interpSelect.value;
      if (!target) {
        this.notify("pick an interpolation target");
        return;
      }
      this.debouncer.run("interp", () =>
        void this.sendEdits([{ kind: "interp_target", value: target }], 5),
      );
    });
    state.subscribe(() => this.refreshTargets());
  }

  refreshTargets(): void {
    const current = this.interpSelect.value;
    this.interpSelect.replaceChildren();
    for (const item of this.state.gallery) {
      if (!item.latentId || item.latentId === this.state.activeLatent) continue;
      const opt = document.createElement("option");
      opt.value = item.latentId;
      opt.textContent = `${item.hash.slice(0, 8)} (${item.provenance})`;
      if (item.latentId === current) opt.selected = true;
      this.interpSelect.append(opt);
    }
  }

  async sendEdits(edits: ExploreEdit[], steps = 3): Promise<ExploreFrame[]> {
    if (!this.state.activeLatent) {
      this.notify("select a gallery item first");
      return [];
    }
    try {
      const resp = await this.api.explore({
        latent_id: this.state.activeLatent,
        edits,
        steps,
        session_id: this.state.sessionId,
      });
      this.state.setSession(resp.session_id);
      this.appendFrames(resp.frames);
      return resp.frames;
    } catch (err) {
      this.notify(err instanceof ApiError ? `server: ${err.message}` : String(err));
      return [];
    }
  }

  appendFrames(frames: ExploreFrame[]): void {
    for (const frame of frames) {
      const img = document.createElement("img");
      img.className = "frame";
      img.src = this.api.imageUrl(frame.image_url);
      img.dataset.hash = frame.hash;
      img.dataset.latent = frame.latent_id;
      img.title = "click to promote to active latent";
      img.addEventListener("click", () => {
        // promoting a frame closes the feedback loop: it becomes the base
        this.state.addItem({
          hash: frame.hash,
          imageUrl: frame.image_url,
          latentId: frame.latent_id,
          provenance: "explore",
        });
        this.state.selectLatent(frame.latent_id, frame.hash);
      });
      this.filmstrip.append(img);
    }
  }
}
