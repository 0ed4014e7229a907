import type { ApiClient } from "../api";
import type { StudioState } from "../state";

/** Thumbnail strip of everything the session produced; click selects a latent. */
export class GalleryPanel {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private state: StudioState,
  ) {
    this.root.classList.add("gallery");
    state.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    this.root.replaceChildren();
    for (const item of this.state.gallery) {
      const card = document.createElement("figure");
      card.className = "thumb";
      card.dataset.hash = item.hash;
      if (item.hash === this.state.activeHash) card.classList.add("active");
      const img = document.createElement("img");
      img.src = this.api.imageUrl(item.imageUrl);
      img.alt = item.provenance;
      img.width = 96;
      img.height = 96;
      const cap = document.createElement("figcaption");
      cap.textContent = item.provenance;
      card.append(img, cap);
      card.addEventListener("click", () => {
        this.state.selectLatent(item.latentId, item.hash);
      });
      this.root.append(card);
    }
  }
}
