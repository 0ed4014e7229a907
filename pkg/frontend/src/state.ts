import type { GeneratedItem, SessionEvent } from "./types";

export interface GalleryItem {
  hash: string;
  imageUrl: string;
  latentId: string | null;
  provenance: "random" | "guided" | "explore" | "restored";
}

export interface ExplorerSettings {
  psi: number;
  sigma: number;
  interpTarget: string | null;
}

export type StateListener = (state: StudioState) => void;

/** Client-side studio state: gallery, active latent, explorer settings. */
export class StudioState {
  selectedModel: string | null = null;
  sessionId: string | null = null;
  gallery: GalleryItem[] = [];
  activeLatent: string | null = null;
  activeHash: string | null = null;
  explorer: ExplorerSettings = { psi: 0.75, sigma: 0.1, interpTarget: null };
  private listeners: StateListener[] = [];

  subscribe(fn: StateListener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this);
  }

  setModel(modelId: string): void {
    this.selectedModel = modelId;
    this.emit();
  }

  setSession(sessionId: string): void {
    this.sessionId = sessionId;
    this.emit();
  }

  /** Append unless the hash is already present; returns whether it was added. */
  addItem(item: GalleryItem): boolean {
    const existing = this.gallery.find((g) => g.hash === item.hash);
    if (existing) {
      this.emit();
      return false;
    }
    this.gallery.push(item);
    this.emit();
    return true;
  }

  addGenerated(items: GeneratedItem[], provenance: GalleryItem["provenance"]): number {
    let added = 0;
    for (const it of items) {
      if (
        this.addItem({
          hash: it.hash,
          imageUrl: it.image_url,
          latentId: it.latent_id,
          provenance,
        })
      ) {
        added += 1;
      }
    }
    return added;
  }

  selectLatent(latentId: string | null, hash: string | null = null): void {
    this.activeLatent = latentId;
    this.activeHash = hash;
    this.emit();
  }

  setExplorer(patch: Partial<ExplorerSettings>): void {
    this.explorer = { ...this.explorer, ...patch };
    this.emit();
  }

  /** Rebuild the gallery from the server journal (page reload path). */
  restoreFromEvents(events: SessionEvent[]): number {
    let added = 0;
    for (const event of events) {
      const latentByIndex = event.latents ?? [];
      event.outputs?.forEach((hash, i) => {
        const latent = latentByIndex[i];
        if (
          this.addItem({
            hash,
            imageUrl: `/img/${hash}.png`,
            latentId: latent ? latent.latent_id : null,
            provenance: "restored",
          })
        ) {
          added += 1;
        }
      });
    }
    return added;
  }
}
