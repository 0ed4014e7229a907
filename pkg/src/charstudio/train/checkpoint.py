"""Self-describing binary checkpoints.

Layout: magic "CFCKPT1" | uint64 LE header length | JSON header |
raw little-endian tensor payload | SHA-256 over everything before it.
The header records spec, tensor name/dtype/shape/offset per section
(params, EMA, optimizer moments), step count, ADA state, and RNG state.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..grad.optim import OptimizerState
from ..grad.rng import make_rng, restore_rng, rng_state
from ..models import ModelBundle, ModelSpec, build_model
from .ada import AdaState

MAGIC = b"CFCKPT1"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


@dataclass
class TrainState:
    bundle: ModelBundle
    optim: dict[str, OptimizerState]
    ada: AdaState
    step: int
    rng: np.random.Generator

    @staticmethod
    def fresh(bundle: ModelBundle, optim: dict[str, OptimizerState], seed: int) -> "TrainState":
        return TrainState(bundle, optim, AdaState(), 0, make_rng(seed))


def _le(arr: np.ndarray) -> np.ndarray:
    return arr.astype(arr.dtype.newbyteorder("<"), copy=False)


def save_checkpoint(state: TrainState, path: str | Path) -> str:
    """Serialize; returns the hex digest stamped at the tail."""
    tensors: list[dict] = []
    blobs: list[bytes] = []
    offset = 0

    def put(section: str, name: str, arr: np.ndarray):
        nonlocal offset
        raw = np.ascontiguousarray(_le(arr)).tobytes()
        tensors.append(
            {
                "name": name,
                "section": section,
                "dtype": str(arr.dtype),
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blobs.append(raw)
        offset += len(raw)

    # canonical ordering throughout, so save -> load -> save is byte-stable
    for name, p in state.bundle.named_parameters():
        put("param", name, p.data)
    for name in sorted(state.bundle.ema):
        put("ema", name, state.bundle.ema[name])
    optim_meta = {}
    for role in sorted(state.optim):
        ostate = state.optim[role]
        optim_meta[role] = ostate.snapshot()
        for name in sorted(ostate.moments1):
            put(f"optim_m1:{role}", name, ostate.moments1[name])
        for name in sorted(ostate.moments2):
            put(f"optim_m2:{role}", name, ostate.moments2[name])

    header = {
        "version": FORMAT_VERSION,
        "model_spec": state.bundle.spec.to_json_dict(),
        "seed": state.bundle.seed,
        "step": state.step,
        "ada": state.ada.snapshot(),
        "rng": _encode_rng(rng_state(state.rng)),
        "optim": optim_meta,
        "tensors": tensors,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = MAGIC + struct.pack("<Q", len(header_bytes)) + header_bytes + b"".join(blobs)
    digest = hashlib.sha256(body).digest()
    Path(path).write_bytes(body + digest)
    return digest.hex()


def _encode_rng(st: dict) -> dict:
    def enc(v):
        if isinstance(v, dict):
            return {k: enc(x) for k, x in v.items()}
        if isinstance(v, np.ndarray):
            return {"__nd__": v.tolist(), "dtype": str(v.dtype)}
        if isinstance(v, (np.integer,)):
            return int(v)
        return v

    return enc(st)


def _decode_rng(st: dict) -> dict:
    def dec(v):
        if isinstance(v, dict) and "__nd__" in v:
            return np.array(v["__nd__"], dtype=v["dtype"])
        if isinstance(v, dict):
            return {k: dec(x) for k, x in v.items()}
        return v

    return dec(st)


def read_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Verify digest and return (header, {section|name -> array})."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 8 + 32 or not data.startswith(MAGIC):
        raise CheckpointError("not a checkpoint file (bad magic)")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checkpoint digest mismatch (corrupt or truncated)")
    (header_len,) = struct.unpack("<Q", body[len(MAGIC) : len(MAGIC) + 8])
    header_start = len(MAGIC) + 8
    header = json.loads(body[header_start : header_start + header_len].decode("utf-8"))
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')}")
    payload = body[header_start + header_len :]
    arrays: dict[str, np.ndarray] = {}
    for meta in header["tensors"]:
        start, n = meta["offset"], meta["nbytes"]
        arr = np.frombuffer(payload[start : start + n], dtype=np.dtype(meta["dtype"]).newbyteorder("<"))
        arrays[f"{meta['section']}|{meta['name']}"] = arr.reshape(meta["shape"]).astype(meta["dtype"])
    return header, arrays


def load_checkpoint(path: str | Path) -> TrainState:
    """Rebuild the full training state; weights restore bit-identically."""
    header, arrays = read_checkpoint(path)
    spec = ModelSpec.from_json_dict(header["model_spec"])
    bundle = build_model(spec, seed=header["seed"])
    params = dict(bundle.named_parameters())
    mismatched = []
    for key, arr in arrays.items():
        section, name = key.split("|", 1)
        if section == "param":
            if name not in params or params[name].shape != arr.shape:
                mismatched.append(name)
            else:
                params[name].set_data(arr)
        elif section == "ema":
            bundle.ema[name] = arr.copy()
    if mismatched:
        raise CheckpointError(f"checkpoint does not match its own spec: {mismatched[:8]}")

    optim: dict[str, OptimizerState] = {}
    for role, meta in header["optim"].items():
        st = OptimizerState(
            kind=meta["kind"],
            lr=meta["lr"],
            beta1=meta["beta1"],
            beta2=meta["beta2"],
            eps=meta["eps"],
            step_count=meta["step_count"],
        )
        for key, arr in arrays.items():
            section, name = key.split("|", 1)
            if section == f"optim_m1:{role}":
                st.moments1[name] = arr.copy()
            elif section == f"optim_m2:{role}":
                st.moments2[name] = arr.copy()
        optim[role] = st

    ada = AdaState.from_snapshot(header["ada"])
    rng = restore_rng(_decode_rng(header["rng"]))
    return TrainState(bundle, optim, ada, header["step"], rng)


def resume_transfer(
    checkpoint_path: str | Path, new_spec: ModelSpec, seed: Optional[int] = None
) -> tuple[ModelBundle, dict]:
    """Build a bundle for ``new_spec`` copying shape-matched weights over.

    Returns (bundle, report) where report lists copied and reinitialized
    parameter names.  EMA shadows follow the same matching rule.
    """
    header, arrays = read_checkpoint(str(checkpoint_path))
    bundle = build_model(new_spec, seed=header["seed"] if seed is None else seed)
    params = dict(bundle.named_parameters())
    copied, reinit = [], []
    for name, p in params.items():
        key = f"param|{name}"
        if key in arrays and arrays[key].shape == p.shape:
            p.set_data(arrays[key])
            copied.append(name)
        else:
            reinit.append(name)
    for name in bundle.ema:
        key = f"ema|{name}"
        if key in arrays and arrays[key].shape == bundle.ema[name].shape:
            bundle.ema[name] = arrays[key].copy()
        else:
            bundle.ema[name] = params[name].data.copy()
    # carry optimizer moments only for the copied parameters
    optim_carry: dict[str, dict] = {}
    copied_set = set(copied)
    for role, meta in header["optim"].items():
        m1, m2 = {}, {}
        for key, arr in arrays.items():
            section, name = key.split("|", 1)
            if name not in copied_set:
                continue
            if section == f"optim_m1:{role}":
                m1[name] = arr.copy()
            elif section == f"optim_m2:{role}":
                m2[name] = arr.copy()
        optim_carry[role] = {"meta": meta, "m1": m1, "m2": m2}
    report = {"copied": copied, "reinitialized": reinit, "optim": optim_carry}
    if not copied:
        report["warning"] = "zero matching parameters"
    return bundle, report
