"""Dataset manifests: ingest, pairing, serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import imageio
from .silhouette import binarize_silhouette

MANIFEST_KINDS = ("silhouette", "colored", "paired")


class DataError(RuntimeError):
    pass


@dataclass
class SampleRecord:
    path: str
    class_index: int
    content_hash: str
    pair_path: Optional[str] = None


@dataclass
class IngestReport:
    per_class: dict[str, int]
    skipped: list[str]
    below_resolution: int
    duplicate_hashes: list[str]

    @property
    def total(self) -> int:
        return sum(self.per_class.values())


@dataclass
class DatasetManifest:
    classes: list[str]
    resolution: int
    kind: str
    records: list[SampleRecord]
    report: Optional[IngestReport] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in MANIFEST_KINDS:
            raise DataError(f"unknown manifest kind {self.kind!r}")
        if self.resolution < 1:
            raise DataError("resolution must be positive")
        for rec in self.records:
            if not 0 <= rec.class_index < len(self.classes):
                raise DataError(f"class index {rec.class_index} out of range in {rec.path}")
            if self.kind == "paired" and not rec.pair_path:
                raise DataError(f"paired manifest requires pair_path on {rec.path}")

    def __len__(self) -> int:
        return len(self.records)

    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.classes}
        for rec in self.records:
            counts[self.classes[rec.class_index]] += 1
        return counts

    def subset(self, class_index: int) -> "DatasetManifest":
        recs = [r for r in self.records if r.class_index == class_index]
        return DatasetManifest(self.classes, self.resolution, self.kind, recs)

    def to_json(self) -> str:
        doc = {
            "classes": self.classes,
            "resolution": self.resolution,
            "kind": self.kind,
            "records": [
                {
                    "path": r.path,
                    "class": r.class_index,
                    **({"pair_path": r.pair_path} if r.pair_path else {}),
                    "hash": r.content_hash,
                }
                for r in self.records
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def load(path: str | Path) -> "DatasetManifest":
        doc = json.loads(Path(path).read_text())
        records = [
            SampleRecord(
                path=r["path"],
                class_index=r["class"],
                content_hash=r["hash"],
                pair_path=r.get("pair_path"),
            )
            for r in doc["records"]
        ]
        return DatasetManifest(doc["classes"], doc["resolution"], doc["kind"], records)


def ingest_directory(
    root: str | Path,
    class_map: Optional[dict[str, str]] = None,
    target_resolution: int = 64,
    kind: str = "silhouette",
) -> DatasetManifest:
    """Walk root/<ClassDir>/*.png into a manifest (sorted, deterministic).

    ``class_map`` maps class names to sub-directories; by default every
    immediate subdirectory becomes a class, sorted by name.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"unreadable dataset root: {root}")
    if class_map is None:
        class_map = {p.name: p.name for p in sorted(root.iterdir()) if p.is_dir()}
    if not class_map:
        raise DataError(f"no class directories under {root}")
    class_names = sorted(class_map)
    dirs = [root / class_map[name] for name in class_names]
    overlap = {d.resolve() for d in dirs}
    if len(overlap) != len(dirs):
        raise DataError("class directories overlap")

    records: list[SampleRecord] = []
    skipped: list[str] = []
    below = 0
    seen_hashes: dict[str, str] = {}
    duplicates: list[str] = []
    per_class = {name: 0 for name in class_names}
    for idx, name in enumerate(class_names):
        cdir = root / class_map[name]
        if not cdir.is_dir():
            raise DataError(f"class directory missing: {cdir}")
        for f in sorted(cdir.iterdir()):
            if not f.is_file():
                continue
            data = f.read_bytes()
            try:
                img = imageio.decode_png(data)
            except imageio.ImageDecodeError:
                skipped.append(str(f))
                continue
            digest = imageio.content_hash(data)
            if digest in seen_hashes:
                duplicates.append(f"{f} == {seen_hashes[digest]}")
            seen_hashes[digest] = str(f)
            if min(img.shape[-2:]) < target_resolution:
                below += 1
            records.append(SampleRecord(str(f), idx, digest))
            per_class[name] += 1

    if not records:
        raise DataError("zero decodable images")
    manifest = DatasetManifest(class_names, target_resolution, kind, records)
    manifest.report = IngestReport(per_class, skipped, below, duplicates)
    return manifest


def derive_pairs(colored: DatasetManifest, threshold: float = 0.5) -> DatasetManifest:
    """Generate a silhouette next to each colored image; returns a paired manifest."""
    if colored.kind != "colored":
        raise DataError(f"derive_pairs needs a colored manifest, got {colored.kind!r}")
    records = []
    for rec in colored.records:
        src = Path(rec.path)
        img = imageio.load_image(src, channels=3)
        sil = binarize_silhouette(img, threshold)
        sil_path = src.with_name(src.stem + ".sil.png")
        try:
            imageio.save_png(sil, sil_path)
        except OSError as exc:
            raise DataError(f"cannot write silhouette beside {src}: {exc}") from exc
        records.append(
            SampleRecord(rec.path, rec.class_index, rec.content_hash, pair_path=str(sil_path))
        )
    return DatasetManifest(colored.classes, colored.resolution, "paired", records)


def manifest_digest(manifest: DatasetManifest) -> str:
    """Stable digest over record hashes; identifies the dataset content."""
    h = hashlib.sha256()
    for rec in manifest.records:
        h.update(rec.content_hash.encode())
        h.update(str(rec.class_index).encode())
    return h.hexdigest()
