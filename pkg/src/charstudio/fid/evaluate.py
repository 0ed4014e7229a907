"""Model evaluation protocols and report comparison."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..data.loader import BatchSource
from ..data.manifest import DatasetManifest
from ..grad.rng import split_rng
from ..models import ModelBundle
from .extractor import FeatureExtractor, extract_features
from .stats import GaussianStats, fit_gaussian, frechet_distance

logger = logging.getLogger(__name__)

SMALL_N_WARN = 10_000


class ProtocolError(ValueError):
    pass


@dataclass
class FidReport:
    extractor_id: str
    model_id: str
    scope: str  # "merged" or a class name
    n_generated: int
    n_real: int
    score: float

    def __post_init__(self):
        if self.score < -1e-6:
            raise ProtocolError(f"FID score far below zero: {self.score}")
        self.score = max(self.score, 0.0)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "FidReport":
        return FidReport(**json.loads(text))


def real_features(
    manifest: DatasetManifest, extractor: FeatureExtractor, class_index: int | None = None
) -> np.ndarray:
    subset = manifest if class_index is None else manifest.subset(class_index)
    if len(subset) == 0:
        raise ProtocolError("no real images in scope")
    source = BatchSource(subset)
    imgs, _ = source.gather(range(len(subset)))
    return extract_features(imgs, extractor)


def generated_features(
    bundle: ModelBundle,
    extractor: FeatureExtractor,
    n_gen: int,
    seed: int,
    class_index: int | None = None,
    batch: int = 64,
) -> np.ndarray:
    rng = split_rng(seed, 101 + (class_index if class_index is not None else 0))
    feats = []
    done = 0
    while done < n_gen:
        k = min(batch, n_gen - done)
        z = rng.standard_normal((k, bundle.spec.z_dim)).astype(np.float32)
        imgs = bundle.generate(z, class_idx=class_index)
        feats.append(extract_features(imgs, extractor))
        done += k
    return np.concatenate(feats, axis=0)


def evaluate_model(
    bundle: ModelBundle,
    manifest: DatasetManifest,
    extractor: FeatureExtractor,
    n_gen: int = 10_000,
    scope: str = "merged",
    model_id: str = "model",
    seed: int = 0,
) -> list[FidReport]:
    """FID protocol: merged for unconditional, per-class + merged for conditional.

    The per-class pass draws ``n_gen`` samples per class against that class's
    real subset; the merged pass draws equal per-class shares totalling
    ``n_gen`` and compares against the full real set.
    """
    if n_gen < 2:
        raise ProtocolError("n_gen must be >= 2")
    if n_gen < SMALL_N_WARN:
        logger.warning("FID with n_gen=%d is biased at small sample counts", n_gen)
    conditional = bundle.spec.conditional
    if scope == "per_class" and not conditional:
        raise ProtocolError("class scope requires a conditional model")

    reports: list[FidReport] = []
    if scope == "merged" or not conditional:
        real = fit_gaussian(real_features(manifest, extractor))
        if conditional:
            fake_feats = _merged_conditional_features(bundle, manifest, extractor, n_gen, seed)
        else:
            fake_feats = generated_features(bundle, extractor, n_gen, seed)
        fake = fit_gaussian(fake_feats)
        reports.append(
            FidReport(
                extractor.id, model_id, "merged", fake.n, real.n, frechet_distance(real, fake)
            )
        )
        return reports

    # conditional per-class protocol: one report per class, then the merged one
    for ci, cname in enumerate(manifest.classes):
        real = fit_gaussian(real_features(manifest, extractor, class_index=ci))
        fake = fit_gaussian(generated_features(bundle, extractor, n_gen, seed, class_index=ci))
        reports.append(
            FidReport(extractor.id, model_id, cname, fake.n, real.n, frechet_distance(real, fake))
        )
    real = fit_gaussian(real_features(manifest, extractor))
    fake = fit_gaussian(_merged_conditional_features(bundle, manifest, extractor, n_gen, seed))
    reports.append(
        FidReport(extractor.id, model_id, "merged", fake.n, real.n, frechet_distance(real, fake))
    )
    return reports


def _merged_conditional_features(bundle, manifest, extractor, n_gen, seed) -> np.ndarray:
    k = len(manifest.classes)
    per_class = max(2, int(np.ceil(n_gen / k)))
    parts = [
        generated_features(bundle, extractor, per_class, seed, class_index=ci)
        for ci in range(k)
    ]
    return np.concatenate(parts, axis=0)


def compare_reports(reports: list[FidReport]) -> list[FidReport]:
    """Ascending by score, ties broken by model id; single extractor enforced."""
    if not reports:
        return []
    ids = {r.extractor_id for r in reports}
    if len(ids) > 1:
        raise ProtocolError(f"reports from different extractors are not comparable: {sorted(ids)}")
    return sorted(reports, key=lambda r: (r.score, r.model_id))


def comparison_text(reports: list[FidReport]) -> str:
    ranked = compare_reports(reports)
    rows = [("model", "scope", "n_gen", "n_real", "fid")]
    rows += [
        (r.model_id, r.scope, str(r.n_generated), str(r.n_real), f"{r.score:.4f}")
        for r in ranked
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def comparison_csv(reports: list[FidReport]) -> str:
    ranked = compare_reports(reports)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["model", "scope", "n_generated", "n_real", "extractor_id", "fid"])
    for r in ranked:
        writer.writerow([r.model_id, r.scope, r.n_generated, r.n_real, r.extractor_id, f"{r.score:.6f}"])
    return buf.getvalue()
