import { ApiClient, ApiError, isJobTicket } from "../api";
import type { StudioState } from "../state";
import type { GuidedResponse } from "../types";
import type { Notice } from "./random";

const MAX_UPLOAD_BYTES = 4 * 1024 * 1024;

/** Upload (or pick from the gallery) a silhouette; show plain vs enhanced side by side. */
export class GuidedPanel {
  fileInput: HTMLInputElement;
  modeSelect: HTMLSelectElement;
  submitButton: HTMLButtonElement;
  results: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private state: StudioState,
    private notify: Notice,
  ) {
    this.root.innerHTML = `
      <h2>Guided creation</h2>
      <label>PNG <input type="file" name="file" accept="image/png"></label>
      <p class="hint">or click a gallery silhouette to use it as the source</p>
      <label>Mode
        <select name="mode">
          <option value="silhouette_to_character">silhouette &rarr; character</option>
          <option value="image_to_silhouette">image &rarr; silhouette</option>
        </select>
      </label>
      <button name="submit">Generate character</button>
      <div class="results"></div>
    `;
    this.fileInput = this.root.querySelector('[name="file"]')!;
    this.modeSelect = this.root.querySelector('[name="mode"]')!;
    this.submitButton = this.root.querySelector('[name="submit"]')!;
    this.results = this.root.querySelector(".results")!;
    this.submitButton.addEventListener("click", () => void this.submit());
  }

  async submit(): Promise<GuidedResponse | null> {
    const mode = this.modeSelect.value as
      | "silhouette_to_character"
      | "image_to_silhouette";
    const file = this.fileInput.files?.[0] ?? null;
    try {
      let result;
      if (file) {
        if (file.size > MAX_UPLOAD_BYTES) {
          this.notify("file exceeds the 4 MiB upload limit");
          return null;
        }
        result = await this.api.generateGuided(file, mode, this.state.sessionId, file.name);
      } else if (this.state.activeHash) {
        result = await this.api.generateGuidedByHash(
          this.state.activeHash,
          mode,
          this.state.sessionId,
        );
      } else {
        this.notify("choose a PNG or select a gallery silhouette");
        return null;
      }
      const guided = isJobTicket(result)
        ? await this.api.awaitJob<GuidedResponse>(result.job_id)
        : result;
      this.state.setSession(guided.session_id);
      this.renderComparison(guided);
      for (const [url, provenance] of [
        [guided.plain, "guided"],
        [guided.enhanced, "guided"],
      ] as const) {
        this.state.addItem({
          hash: hashFromUrl(url),
          imageUrl: url,
          latentId: guided.latent_id,
          provenance,
        });
      }
      return guided;
    } catch (err) {
      if (err instanceof ApiError) {
        const hint =
          err.status === 413
            ? "upload too large"
            : err.status === 415
              ? "only PNG uploads are supported"
              : err.message;
        this.notify(`server: ${hint}`);
      } else {
        this.notify(String(err));
      }
      return null;
    }
  }

  renderComparison(guided: GuidedResponse): void {
    this.results.replaceChildren();
    const pairs: [string, string][] = [
      ["plain coloring", guided.plain],
      ["enhanced", guided.enhanced],
    ];
    for (const [label, url] of pairs) {
      const card = document.createElement("figure");
      card.className = "result-card";
      const img = document.createElement("img");
      img.src = this.api.imageUrl(url);
      img.alt = label;
      const cap = document.createElement("figcaption");
      cap.textContent =
        label + (guided.low_confidence && label === "enhanced" ? " (low confidence)" : "");
      card.append(img, cap);
      this.results.append(card);
    }
  }
}

export function hashFromUrl(url: string): string {
  const m = /\/img\/([0-9a-f]+)\.png$/.exec(url);
  return m ? m[1] : url;
}
