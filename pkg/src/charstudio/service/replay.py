"""Journal replay: every stored output must be regenerable bit-identically."""

from __future__ import annotations

from dataclasses import dataclass

from ..data import imageio
from .registry import ModelRegistry
from .render import render_png
from .store import BlobStore, SessionJournal


@dataclass
class ReplayResult:
    session_id: str
    events: int
    outputs_checked: int
    regenerated: int
    mismatches: list[str]
    unreplayable: list[str]  # outputs the journal does not describe how to rebuild

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.unreplayable


def replay_session(
    store_dir: str, registry: ModelRegistry, session_id: str
) -> ReplayResult:
    """Re-render every output in the journal and compare content hashes.

    Latent-backed outputs re-render through the shared latent path; guided
    translator outputs recompute from the stored upload blob.
    """
    registry.load_all()
    store = BlobStore(store_dir)
    journal = SessionJournal(store_dir)
    events = journal.read(session_id)

    checked = regenerated = 0
    mismatches: list[str] = []
    unreplayable: list[str] = []
    for idx, event in enumerate(events):
        produced: dict[str, str] = {}
        for item in event.get("latents", []):
            entry = registry.get(item["model_id"])
            png = render_png(entry.bundle, item["latent"])
            produced[imageio.content_hash(png)] = item["latent_id"]
        if event.get("kind") == "generate_guided":
            _replay_guided(event, store, registry, produced)
        for digest in event.get("outputs", []):
            checked += 1
            if digest in produced:
                regenerated += 1
                if not store.has(digest):
                    mismatches.append(f"event {idx}: {digest} missing from store")
            elif store.has(digest):
                unreplayable.append(f"event {idx}: {digest} (stored but not regenerable)")
            else:
                mismatches.append(f"event {idx}: {digest} not regenerable and not stored")
        # a latent that regenerates to a hash absent from the event means drift
        for digest, lid in produced.items():
            if digest not in event.get("outputs", []):
                mismatches.append(f"event {idx}: {lid} regenerated to unknown hash {digest}")
    return ReplayResult(
        session_id=session_id,
        events=len(events),
        outputs_checked=checked,
        regenerated=regenerated,
        mismatches=mismatches,
        unreplayable=unreplayable,
    )


def _replay_guided(event: dict, store: BlobStore, registry: ModelRegistry, produced: dict) -> None:
    from .app import guided_binarize, guided_plain

    req = event.get("request", {})
    upload = store.get(req["upload_hash"])
    img = imageio.decode_png(upload, channels=3)
    if req.get("translator_id"):
        entry = registry.get(req["translator_id"])
        plain = guided_plain(entry.bundle, img)
    else:
        entry = registry.get(req["silhouette_id"])
        plain = guided_binarize(entry.bundle, img)
    produced[imageio.content_hash(imageio.encode_png(plain))] = "guided-plain"
