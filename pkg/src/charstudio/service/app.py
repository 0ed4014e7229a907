"""HTTP studio service: random generation, guided creation, latent exploration."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Response, UploadFile
from pydantic import BaseModel, Field

from ..data import imageio
from ..data.resize import resize_bicubic
from ..data.silhouette import binarize_silhouette
from ..grad.rng import split_rng
from ..pipeline.concepts import sharpen_silhouette
from ..pipeline.project import project_latent
from .registry import ModelRegistry
from .render import (
    DEFAULT_TEMPERATURE,
    anchor_projection,
    latent_id_for,
    make_latent,
    render_latent,
    render_png,
)
from .store import BlobStore, SessionJournal, StorageFull

MAX_COUNT = 16


@dataclass
class ServiceConfig:
    store_dir: str
    registry: ModelRegistry
    upload_limit: int = 4 * 1024 * 1024
    sync_jobs: bool = True  # run long work inline; False defers to the job queue
    projection_steps: int = 60


@dataclass
class JobRecord:
    status: str = "pending"  # pending | done | error
    result: Optional[dict] = None
    error: Optional[str] = None


class StudioService:
    """State shared by the handlers: registry, store, journal, latent index."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.registry = cfg.registry
        self.registry.load_all()
        self.store = BlobStore(cfg.store_dir)
        self.journal = SessionJournal(cfg.store_dir)
        self.latents: dict[str, dict] = {}
        self.jobs: dict[str, JobRecord] = {}
        self._jobs_lock = threading.Lock()
        self._infer_lock = threading.Lock()
        self._rebuild_latent_index()

    # -- latent bookkeeping ---------------------------------------------------

    def _rebuild_latent_index(self) -> None:
        for sid in self.journal.sessions():
            for event in self.journal.read(sid):
                for item in event.get("latents", []):
                    self.latents[item["latent_id"]] = item

    def register_latent(self, model_id: str, latent: dict) -> dict:
        lid = latent_id_for(model_id, latent)
        item = {"latent_id": lid, "model_id": model_id, "latent": latent}
        self.latents[lid] = item
        return item

    # -- persistence ------------------------------------------------------------

    def persist(self, session_id: str, event: dict, images: list[tuple[bytes, dict]]) -> list[str]:
        """Blobs first (dedup by hash), then the journal line, then respond."""
        hashes = []
        try:
            for png, sidecar in images:
                hashes.append(self.store.put(png, sidecar))
            event["outputs"] = hashes
            self.journal.append(session_id, event)
        except StorageFull as exc:
            raise HTTPException(507, f"storage full: {exc}") from exc
        return hashes

    # -- jobs ----------------------------------------------------------------------

    def submit(self, fn) -> dict:
        if self.cfg.sync_jobs:
            return fn()
        job_id = uuid.uuid4().hex[:12]
        with self._jobs_lock:
            self.jobs[job_id] = JobRecord()

        def run():
            try:
                result = fn()
                with self._jobs_lock:
                    self.jobs[job_id].status = "done"
                    self.jobs[job_id].result = result
            except HTTPException as exc:
                with self._jobs_lock:
                    self.jobs[job_id].status = "error"
                    self.jobs[job_id].error = f"{exc.status_code}: {exc.detail}"
            except Exception as exc:  # noqa: BLE001 - job boundary
                with self._jobs_lock:
                    self.jobs[job_id].status = "error"
                    self.jobs[job_id].error = str(exc)

        threading.Thread(target=run, daemon=True).start()
        return {"job_id": job_id, "poll": f"/api/v1/jobs/{job_id}", "status": "pending"}


class RandomRequest(BaseModel):
    model_id: str
    count: int = Field(default=1)
    class_index: Optional[int] = None
    psi: float = 0.75
    seed: Optional[int] = None
    session_id: Optional[str] = None


class ExploreEdit(BaseModel):
    kind: str
    value: float | str


class ExploreRequest(BaseModel):
    latent_id: Optional[str] = None
    edits: list[ExploreEdit]
    steps: int = 3
    seed: Optional[int] = None
    session_id: Optional[str] = None


def _session_or_new(journal_id: Optional[str]) -> str:
    if journal_id:
        if not journal_id.replace("-", "").isalnum():
            raise HTTPException(422, "malformed session id")
        return journal_id
    return uuid.uuid4().hex


def guided_plain(translator_bundle, img: np.ndarray) -> np.ndarray:
    """Binarize the upload at translator resolution, then colorize it."""
    res = translator_bundle.spec.resolution
    sil = binarize_silhouette(resize_bicubic(img, res).astype(np.float32))
    return translator_bundle.translate(sil[None])[0]


def guided_binarize(sil_bundle, img: np.ndarray) -> np.ndarray:
    res = sil_bundle.spec.resolution
    return binarize_silhouette(resize_bicubic(img, res).astype(np.float32))


def create_app(cfg: ServiceConfig) -> FastAPI:
    svc = StudioService(cfg)
    app = FastAPI(title="charstudio", version="0.1.0")
    app.state.service = svc

    @app.get("/api/v1/models")
    def list_models():
        return {"models": svc.registry.listing(), "pipeline": vars(svc.registry.roles)}

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            events = svc.journal.read(session_id)
        except (KeyError, ValueError):
            raise HTTPException(404, "unknown session") from None
        return {"session_id": session_id, "events": events}

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        with svc._jobs_lock:
            job = svc.jobs.get(job_id)
            if job is None:
                raise HTTPException(404, "unknown job")
            return {"job_id": job_id, "status": job.status, "result": job.result, "error": job.error}

    @app.get("/img/{digest}.png")
    def get_image(digest: str):
        try:
            data = svc.store.get(digest)
        except KeyError:
            raise HTTPException(404, "unknown image") from None
        return Response(content=data, media_type="image/png")

    @app.post("/api/v1/generate/random")
    def generate_random(req: RandomRequest):
        try:
            entry = svc.registry.get(req.model_id)
        except KeyError:
            raise HTTPException(404, f"unknown model {req.model_id!r}") from None
        if not 1 <= req.count <= MAX_COUNT:
            raise HTTPException(422, f"count must lie in [1, {MAX_COUNT}]")
        spec = entry.bundle.spec
        if req.class_index is not None and not spec.conditional:
            raise HTTPException(422, "class index on unconditional model")
        if spec.conditional and req.class_index is None:
            raise HTTPException(422, "conditional model requires class_index")
        if spec.conditional and not 0 <= req.class_index < spec.num_classes:
            raise HTTPException(422, "class index out of range")
        if not 0.0 <= req.psi <= 1.5:
            raise HTTPException(422, "psi must lie in [0, 1.5]")
        session_id = _session_or_new(req.session_id)
        base_seed = req.seed if req.seed is not None else int.from_bytes(uuid.uuid4().bytes[:6], "big")

        def work():
            with svc._infer_lock:
                anchor_w = None
                if entry.anchor.enabled:
                    anchor_w = anchor_projection(entry, base_seed)
                items = []
                images = []
                latents = []
                for i in range(req.count):
                    latent = make_latent(entry, base_seed + i, req.psi, req.class_index, anchor_w)
                    item = svc.register_latent(req.model_id, latent)
                    png = render_png(entry.bundle, latent)
                    digest = imageio.content_hash(png)
                    sidecar = {"model_id": req.model_id, "latent": latent, "provenance": "random"}
                    images.append((png, sidecar))
                    latents.append(item)
                    items.append({"image_url": f"/img/{digest}.png", "hash": digest, "latent_id": item["latent_id"]})
                event = {
                    "kind": "generate_random",
                    "request": req.model_dump(),
                    "seed": base_seed,
                    "latents": latents,
                }
                svc.persist(session_id, event, images)
            return {"items": items, "seed": base_seed, "session_id": session_id}

        return svc.submit(work) if entry.anchor.enabled else work()

    @app.post("/api/v1/generate/guided")
    def generate_guided(
        file: Optional[UploadFile] = File(default=None),
        mode: str = Form(...),
        session_id: Optional[str] = Form(default=None),
        source_hash: Optional[str] = Form(default=None),
    ):
        if mode not in ("silhouette_to_character", "image_to_silhouette"):
            raise HTTPException(422, f"unknown mode {mode!r}")
        if (file is None) == (source_hash is None):
            raise HTTPException(422, "provide exactly one of file or source_hash")
        if source_hash is not None:
            # already-stored gallery image referenced by hash, no re-upload
            try:
                raw = svc.store.get(source_hash)
            except KeyError:
                raise HTTPException(404, f"unknown image hash {source_hash!r}") from None
        else:
            raw = file.file.read(cfg.upload_limit + 1)
            if len(raw) > cfg.upload_limit:
                raise HTTPException(413, "upload exceeds size limit")
        if not raw or not raw.startswith(b"\x89PNG\r\n\x1a\n"):
            raise HTTPException(415, "upload must be a PNG image")
        try:
            img = imageio.decode_png(raw, channels=3)
        except imageio.ImageDecodeError as exc:
            raise HTTPException(415, f"undecodable PNG: {exc}") from exc
        sid = _session_or_new(session_id)
        upload_hash = svc.store.put(raw, {"provenance": "uploaded"})

        if mode == "silhouette_to_character":
            translator = svc.registry.role("translator")
            style = svc.registry.role("style")
            if translator is None:
                raise HTTPException(503, "no translator model configured")

            def work():
                with svc._infer_lock:
                    plain = guided_plain(translator.bundle, img)
                    plain_png = imageio.encode_png(plain)
                    images = [(plain_png, {"provenance": "derived", "parent": upload_hash, "stage": "plain"})]
                    latents = []
                    enhanced_hash = imageio.content_hash(plain_png)
                    low_conf = None
                    if style is not None:
                        proj = project_latent(plain, style.bundle, steps=cfg.projection_steps)
                        latent = {"w": [float(v) for v in proj.w], "psi": 1.0, "z": [], "seed": -1}
                        item = svc.register_latent(style.model_id, latent)
                        latents.append(item)
                        enhanced = render_latent(style.bundle, latent)
                        enhanced_png = imageio.encode_png(enhanced)
                        enhanced_hash = imageio.content_hash(enhanced_png)
                        images.append(
                            (enhanced_png, {"provenance": "derived", "parent": upload_hash, "stage": "enhanced"})
                        )
                        low_conf = proj.low_confidence()
                    event = {
                        "kind": "generate_guided",
                        "request": {
                            "mode": mode,
                            "upload_hash": upload_hash,
                            "translator_id": translator.model_id,
                        },
                        "latents": latents,
                    }
                    hashes = svc.persist(sid, event, images)
                return {
                    "plain": f"/img/{hashes[0]}.png",
                    "enhanced": f"/img/{enhanced_hash}.png",
                    "latent_id": latents[0]["latent_id"] if latents else None,
                    "low_confidence": low_conf,
                    "session_id": sid,
                }

            return svc.submit(work)

        # image_to_silhouette
        sil_entry = svc.registry.role("silhouette")
        if sil_entry is None:
            raise HTTPException(503, "no silhouette model configured")

        def work():
            with svc._infer_lock:
                sil = guided_binarize(sil_entry.bundle, img)
                plain_png = imageio.encode_png(sil)
                images = [(plain_png, {"provenance": "uploaded", "parent": upload_hash, "stage": "plain"})]
                latents = []
                enhanced_hash = imageio.content_hash(plain_png)
                low_conf = None
                if sil_entry.bundle.spec.is_style:
                    proj = project_latent(sil, sil_entry.bundle, steps=cfg.projection_steps)
                    latent = {
                        "w": [float(v) for v in proj.w],
                        "psi": 1.0,
                        "z": [],
                        "seed": -1,
                        "temperature": DEFAULT_TEMPERATURE,
                    }
                    item = svc.register_latent(sil_entry.model_id, latent)
                    latents.append(item)
                    enhanced = render_latent(sil_entry.bundle, latent)
                    enhanced_png = imageio.encode_png(enhanced)
                    enhanced_hash = imageio.content_hash(enhanced_png)
                    images.append(
                        (enhanced_png, {"provenance": "derived", "parent": upload_hash, "stage": "enhanced"})
                    )
                    low_conf = proj.low_confidence()
                event = {
                    "kind": "generate_guided",
                    "request": {
                        "mode": mode,
                        "upload_hash": upload_hash,
                        "silhouette_id": sil_entry.model_id,
                    },
                    "latents": latents,
                }
                hashes = svc.persist(sid, event, images)
            return {
                "plain": f"/img/{hashes[0]}.png",
                "enhanced": f"/img/{enhanced_hash}.png",
                "latent_id": latents[0]["latent_id"] if latents else None,
                "low_confidence": low_conf,
                "session_id": sid,
            }

        needs_projection = sil_entry.bundle.spec.is_style
        return svc.submit(work) if needs_projection else work()

    @app.post("/api/v1/latent/explore")
    def latent_explore(req: ExploreRequest):
        if not req.edits:
            raise HTTPException(422, "edits must be non-empty")
        base_item = svc.latents.get(req.latent_id or "")
        if base_item is None:
            raise HTTPException(404, "unknown latent")
        try:
            entry = svc.registry.get(base_item["model_id"])
        except KeyError:
            raise HTTPException(404, "latent's model is not loaded") from None
        sid = _session_or_new(req.session_id)
        seed = req.seed if req.seed is not None else int.from_bytes(uuid.uuid4().bytes[:6], "big")

        with svc._infer_lock:
            frames = []
            latents = []
            images = []
            current = dict(base_item["latent"])
            for edit_no, edit in enumerate(req.edits):
                try:
                    new_latents = _apply_edit(svc, entry, current, edit, req.steps, seed + edit_no)
                except ValueError as exc:
                    raise HTTPException(422, str(exc)) from exc
                for latent in new_latents:
                    item = svc.register_latent(base_item["model_id"], latent)
                    png = render_png(entry.bundle, latent)
                    digest = imageio.content_hash(png)
                    images.append((png, {"model_id": base_item["model_id"], "latent": latent, "provenance": "derived"}))
                    latents.append(item)
                    frames.append({"image_url": f"/img/{digest}.png", "hash": digest, "latent_id": item["latent_id"]})
                current = dict(new_latents[-1])
            event = {
                "kind": "latent_explore",
                "request": req.model_dump(),
                "seed": seed,
                "latents": latents,
            }
            svc.persist(sid, event, images)
        return {"frames": frames, "session_id": sid}

    return app


def _apply_edit(svc, entry, current: dict, edit, steps: int, seed: int) -> list[dict]:
    bundle = entry.bundle
    kind = edit.kind
    if kind == "psi":
        psi = float(edit.value)
        if not 0.0 <= psi <= 1.5:
            raise ValueError("psi out of [0, 1.5]")
        latent = dict(current)
        latent["psi"] = psi
        if bundle.spec.is_style:
            if "w_raw" not in latent:
                raise ValueError("latent has no pre-truncation mapping output to re-truncate")
            w_raw = np.asarray(latent["w_raw"], dtype=np.float32)
            w_bar = bundle.nets["generator"].mapping.w_mean.data
            w = w_bar + psi * (w_raw - w_bar)
            if "w_proj" in latent:
                rho = float(latent["rho"])
                w = (1.0 - rho) * w + rho * np.asarray(latent["w_proj"], dtype=np.float32)
            latent["w"] = [float(np.float32(v)) for v in w]
        return [latent]
    if kind == "perturb":
        sigma = float(edit.value)
        if sigma < 0:
            raise ValueError("perturb sigma must be >= 0")
        rng = split_rng(seed, 31337)
        latent = dict(current)
        if bundle.spec.is_style and "w" in latent:
            w = np.asarray(latent["w"], dtype=np.float32)
            w = w + sigma * rng.standard_normal(w.shape).astype(np.float32)
            latent["w"] = [float(np.float32(v)) for v in w]
        else:
            z = np.asarray(latent["z"], dtype=np.float32)
            z = z + sigma * rng.standard_normal(z.shape).astype(np.float32)
            latent["z"] = [float(np.float32(v)) for v in z]
        return [latent]
    if kind == "interp_target":
        other = svc.latents.get(str(edit.value))
        if other is None:
            raise ValueError("unknown interpolation target latent")
        if other["model_id"] != entry.model_id:
            raise ValueError("interpolation endpoints belong to different models")
        if steps < 2:
            raise ValueError("interpolation needs steps >= 2")
        key = "w" if bundle.spec.is_style and "w" in current else "z"
        a = np.asarray(current[key], dtype=np.float32)
        b = np.asarray(other["latent"][key], dtype=np.float32)
        if a.shape != b.shape:
            raise ValueError("latent dimensions differ")
        out = []
        for t in np.linspace(0.0, 1.0, steps):
            vec = ((1.0 - t) * a + t * b).astype(np.float32)
            latent = dict(current)
            latent[key] = [float(v) for v in vec]
            out.append(latent)
        return out
    raise ValueError(f"unknown edit kind {kind!r}")
