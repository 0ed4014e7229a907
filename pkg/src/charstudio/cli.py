"""Command-line entry point wrapping ingest, training, evaluation, and serving.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import report as report_mod
from .data import (
    AugPipelineConfig,
    DatasetManifest,
    derive_pairs,
    imageio,
    ingest_directory,
    synthetic,
)
from .fid import (
    IdentityPoolExtractor,
    comparison_csv,
    comparison_text,
    evaluate_model,
    train_desk_extractor,
)
from .models import DEFAULT_OBJECTIVE, ModelSpec
from .objectives import ObjectiveConfig
from .pipeline import colorize, generate_silhouette, project_latent
from .train import TrainConfig, load_checkpoint, run_training

FAMILY_ALIASES = {
    "dcgan": "dcgan",
    "wgan": "wgan",
    "wgan-gp": "wgan_gp",
    "wgan_gp": "wgan_gp",
    "gan-qp": "gan_qp",
    "gan_qp": "gan_qp",
    "biggan-lite": "biggan_lite",
    "biggan_lite": "biggan_lite",
    "stylegan-lite": "stylegan_lite",
    "stylegan_lite": "stylegan_lite",
    "pix2pix": "pix2pix",
    "cyclegan": "cyclegan",
}


def runtime_guard(fn):
    """Map runtime failures to exit code 1 with the message on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - CLI boundary
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def emit(doc: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(doc, indent=1, sort_keys=True, default=str))
    else:
        for k, v in doc.items():
            click.echo(f"{k}: {v}")


@click.group()
def main():
    """Desk-scale GAN studio for character concept co-creation."""


@main.command()
@click.option("--root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--classes", default=None, help="Comma-separated class names (default: subdirs).")
@click.option("--res", default=64, show_default=True, help="Target square resolution.")
@click.option("--kind", default="silhouette", type=click.Choice(["silhouette", "colored"]))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@runtime_guard
def ingest(root, classes, res, kind, out, as_json):
    """Scan a class-per-directory image tree into a manifest."""
    class_map = None
    if classes:
        class_map = {name: name for name in classes.split(",")}
    manifest = ingest_directory(root, class_map=class_map, target_resolution=res, kind=kind)
    manifest.save(out)
    rep = manifest.report
    emit(
        {
            "manifest": out,
            "records": len(manifest),
            "classes": manifest.classes,
            "per_class": rep.per_class,
            "skipped": len(rep.skipped),
            "below_resolution": rep.below_resolution,
            "duplicates": len(rep.duplicate_hashes),
        },
        as_json,
    )


@main.command()
@click.option("--model", "family", required=True, type=click.Choice(sorted(set(FAMILY_ALIASES))))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--steps", default=100, show_default=True)
@click.option("--batch", default=16, show_default=True)
@click.option("--snap", default=10, show_default=True, help="Snapshot interval in steps.")
@click.option("--seed", default=0, show_default=True)
@click.option("--lr", default=2e-4, show_default=True)
@click.option("--z-dim", default=64, show_default=True)
@click.option("--base-channels", default=32, show_default=True)
@click.option("--conditioning", default="none", type=click.Choice(["none", "embed_concat", "cond_batchnorm"]))
@click.option("--augpipe", default=None, help='Augmentation stages, e.g. "bgcfc".')
@click.option("--aug-p", default=0.0, show_default=True, help="Fixed augmentation probability.")
@click.option("--ada", "ada_enabled", is_flag=True, help="Adapt augmentation probability.")
@click.option("--ada-target", default=0.6, show_default=True)
@click.option("--resume", default=None, type=click.Path(exists=True), help="Checkpoint to resume/transfer from.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def train(family, manifest_path, steps, batch, snap, seed, lr, z_dim, base_channels,
          conditioning, augpipe, aug_p, ada_enabled, ada_target, resume, out_dir, as_json):
    """Train one model family on a manifest; writes checkpoints, logs, figures."""
    family = FAMILY_ALIASES[family]
    manifest = DatasetManifest.load(manifest_path)
    channels = 1 if manifest.kind == "silhouette" else 3
    spec = ModelSpec(
        family=family,
        resolution=manifest.resolution,
        z_dim=z_dim,
        w_dim=z_dim,
        base_channels=base_channels,
        num_classes=len(manifest.classes) if conditioning != "none" else 0,
        conditioning=conditioning,
        channels=3 if family in ("pix2pix", "cyclegan") else channels,
        source_channels=1,
    )
    objective = ObjectiveConfig.for_kind(DEFAULT_OBJECTIVE[family])
    aug = AugPipelineConfig.from_flags(augpipe, p=aug_p) if augpipe else AugPipelineConfig(p=aug_p)
    cfg = TrainConfig(
        spec=spec,
        objective=objective,
        batch_size=batch,
        total_steps=steps,
        snap=snap,
        seed=seed,
        lr_g=lr,
        lr_d=lr,
        augment=aug,
        ada_enabled=ada_enabled,
        ada_target=ada_target,
        resume=resume,
        out_dir=out_dir,
    )
    final, metrics = run_training(cfg, manifest)
    out = Path(out_dir)
    doc = {"checkpoint": str(final), "steps": len(metrics)}
    if metrics:
        report_mod.save_metrics_csv(metrics, out / "metrics.csv")
        report_mod.save_training_curves(metrics, out / "curves.png")
        doc["metrics_csv"] = str(out / "metrics.csv")
        doc["curves"] = str(out / "curves.png")
        doc["final_d_loss"] = metrics[-1]["d_loss"]
        doc["final_g_loss"] = metrics[-1]["g_loss"]
    emit(doc, as_json)


@main.command("eval-fid")
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--n-gen", default=1000, show_default=True)
@click.option("--scope", default="merged", type=click.Choice(["merged", "per_class"]))
@click.option("--extractor", "extractor_kind", default="desk", type=click.Choice(["desk", "identity"]))
@click.option("--extractor-epochs", default=2, show_default=True)
@click.option("--model-id", default=None, help="Label for the report (default: checkpoint stem).")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def eval_fid(ckpt, manifest_path, n_gen, scope, extractor_kind, extractor_epochs,
             model_id, seed, out_dir, as_json):
    """Score a checkpoint against the real set; writes CSV, text, and a figure."""
    manifest = DatasetManifest.load(manifest_path)
    state = load_checkpoint(ckpt)
    bundle = state.bundle
    if extractor_kind == "identity":
        channels = 1 if manifest.kind == "silhouette" else 3
        extractor = IdentityPoolExtractor(resolution=manifest.resolution, channels=channels)
    else:
        extractor = train_desk_extractor(manifest, epochs=extractor_epochs, seed=seed)
    model_id = model_id or Path(ckpt).stem
    reports = evaluate_model(
        bundle, manifest, extractor, n_gen=n_gen, scope=scope, model_id=model_id, seed=seed
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fid.json").write_text(json.dumps([json.loads(r.to_json()) for r in reports], indent=1))
    (out / "fid.csv").write_text(comparison_csv(reports))
    (out / "fid.txt").write_text(comparison_text(reports))
    report_mod.save_fid_figure(reports, out / "fid.png")
    doc = {r.scope: r.score for r in reports}
    doc.update(extractor=extractor.id, out=str(out))
    emit(doc, as_json)


@main.command()
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--psi", default=0.75, show_default=True)
@click.option("--count", default=1, show_default=True)
@click.option("--class-index", default=None, type=int)
@click.option("--temperature", default=50.0, show_default=True, help="Silhouette sharpening.")
@click.option("--grid", is_flag=True, help="Also write a tiled grid PNG.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def generate(ckpt, seed, psi, count, class_index, temperature, grid, out_dir, as_json):
    """Sample images from a checkpoint; PNGs plus provenance sidecars."""
    state = load_checkpoint(ckpt)
    bundle = state.bundle
    bundle.apply_ema()
    if bundle.spec.is_style and not bundle.nets["generator"].mapping.w_mean_estimated:
        bundle.nets["generator"].mapping.estimate_w_mean(seed=bundle.seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hashes = []
    images = []
    for i in range(count):
        s = seed + i
        if bundle.spec.channels == 1:
            concept = generate_silhouette(
                bundle, s, class_index=class_index, psi=psi, temperature=temperature
            )
        else:
            z = bundle.latent_from_seed(s, n=1)
            img = bundle.generate(z, class_idx=class_index, psi=psi, use_ema=False)[0]
            from .pipeline.concepts import Concept, LatentRecord

            concept = Concept(
                image=img,
                provenance="random",
                latent=LatentRecord(seed=s, z=z[0], psi=psi, class_index=class_index),
            )
        digest = concept.save(out / f"gen_{s:08d}.png")
        hashes.append(digest)
        images.append(concept.image)
    if grid:
        report_mod.save_image_grid(np.stack(images), out / "grid.png")
    emit({"out": str(out), "count": count, "hashes": hashes}, as_json)


@main.command("colorize")
@click.option("--ckpt", required=True, type=click.Path(exists=True), help="Translator checkpoint.")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--strict", is_flag=True, help="Reject resolution mismatches instead of resizing.")
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def colorize_cmd(ckpt, input_path, out_path, strict, as_json):
    """Color a silhouette PNG with a trained translator."""
    state = load_checkpoint(ckpt)
    bundle = state.bundle
    bundle.apply_ema()
    sil = imageio.load_image(input_path, channels=1)
    concept = colorize(sil, bundle, strict=strict)
    Path(out_path).write_bytes(concept.png)
    emit({"out": out_path, "hash": concept.content_hash}, as_json)


@main.command()
@click.option("--ckpt", required=True, type=click.Path(exists=True), help="Style-family checkpoint.")
@click.option("--target", required=True, type=click.Path(exists=True))
@click.option("--steps", default=200, show_default=True)
@click.option("--lr", default=0.05, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def project(ckpt, target, steps, lr, out_dir, as_json):
    """Fit a style latent to a target image; writes w, reconstruction, and trace."""
    state = load_checkpoint(ckpt)
    bundle = state.bundle
    bundle.apply_ema()
    img = imageio.load_image(target)
    result = project_latent(img, bundle, steps=steps, lr=lr)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "w.json").write_text(json.dumps({"w": result.w.tolist(), "loss": result.final_loss}))
    imageio.save_png(result.reconstruction, out / "reconstruction.png")
    report_mod.save_projection_trace(result.loss_trace, out / "trace.png")
    with open(out / "trace.csv", "w") as f:
        f.write("step,best_loss\n")
        for i, v in enumerate(result.loss_trace):
            f.write(f"{i},{v}\n")
    emit(
        {
            "out": str(out),
            "steps_used": result.steps_used,
            "final_loss": result.final_loss,
            "pixel_l2_rel": result.pixel_l2_rel,
            "low_confidence": result.low_confidence(),
        },
        as_json,
    )


@main.command()
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True))
@click.option("--store", "store_dir", required=True, type=click.Path(file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--async-jobs/--sync-jobs", default=True, show_default=True)
@click.option("--upload-limit", default=4 * 1024 * 1024, show_default=True)
@runtime_guard
def serve(registry_path, store_dir, host, port, async_jobs, upload_limit):
    """Run the studio HTTP service."""
    import uvicorn

    from .service import ModelRegistry, ServiceConfig, create_app

    registry = ModelRegistry.from_config_file(registry_path)
    cfg = ServiceConfig(
        store_dir=store_dir,
        registry=registry,
        upload_limit=upload_limit,
        sync_jobs=not async_jobs,
    )
    app = create_app(cfg)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--per-class", default=100, show_default=True)
@click.option("--res", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--colored", is_flag=True, help="Class-colored fills instead of silhouettes.")
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def synth(out_dir, per_class, res, seed, colored, as_json):
    """Write a procedural shape dataset plus its manifest."""
    manifest = synthetic.write_dataset(out_dir, per_class=per_class, res=res, seed=seed, colored=colored)
    path = Path(out_dir) / "manifest.json"
    manifest.save(path)
    emit({"manifest": str(path), "records": len(manifest), "classes": manifest.classes}, as_json)


@main.command("derive-pairs")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@runtime_guard
def derive_pairs_cmd(manifest_path, threshold, out, as_json):
    """Generate silhouettes beside a colored set and write the paired manifest."""
    colored = DatasetManifest.load(manifest_path)
    paired = derive_pairs(colored, threshold=threshold)
    paired.save(out)
    emit({"manifest": out, "records": len(paired)}, as_json)


if __name__ == "__main__":
    main()
