"""PNG <-> float image conversion.

Images travel through the system as C x H x W float32 arrays in [-1, 1]
(batches add a leading N).  PNG encoding uses fixed settings so identical
pixels always produce identical bytes, which the content-addressed store
and the replay contract rely on.
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image


class ImageDecodeError(ValueError):
    pass


def to_unit(img: np.ndarray) -> np.ndarray:
    """[-1,1] -> [0,1]."""
    return (img + 1.0) * 0.5


def from_unit(img: np.ndarray) -> np.ndarray:
    """[0,1] -> [-1,1]."""
    return img * 2.0 - 1.0


def to_uint8(img: np.ndarray) -> np.ndarray:
    """C x H x W in [-1,1] -> H x W (x C) uint8."""
    arr = np.clip(to_unit(np.asarray(img)), 0.0, 1.0)
    arr = np.round(arr * 255.0).astype(np.uint8)
    if arr.shape[0] == 1:
        return arr[0]
    return np.transpose(arr, (1, 2, 0))


def from_uint8(arr: np.ndarray) -> np.ndarray:
    """H x W (x C) uint8 -> C x H x W float32 in [-1,1]."""
    if arr.ndim == 2:
        arr = arr[None, :, :]
    else:
        arr = np.transpose(arr, (2, 0, 1))
    return from_unit(arr.astype(np.float32) / 255.0)


def decode_png(data: bytes, channels: int | None = None) -> np.ndarray:
    """Decode PNG bytes to C x H x W float32 in [-1,1]; C in {1,3}."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            target_mode = None
            if channels == 1:
                target_mode = "L"
            elif channels == 3:
                target_mode = "RGB"
            else:
                target_mode = "L" if im.mode in ("1", "L", "I;16", "I") else "RGB"
            if im.mode != target_mode:
                im = im.convert(target_mode)
            arr = np.asarray(im)
    except Exception as exc:  # Pillow raises many concrete types
        raise ImageDecodeError(str(exc)) from exc
    return from_uint8(arr)


def load_image(path: str | Path, channels: int | None = None) -> np.ndarray:
    return decode_png(Path(path).read_bytes(), channels=channels)


def encode_png(img: np.ndarray) -> bytes:
    """C x H x W float in [-1,1] -> deterministic PNG bytes."""
    arr = to_uint8(img)
    mode = "L" if arr.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def save_png(img: np.ndarray, path: str | Path) -> str:
    data = encode_png(img)
    Path(path).write_bytes(data)
    return content_hash(data)


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def image_size(path: str | Path) -> tuple[int, int]:
    with Image.open(path) as im:
        return im.size  # (width, height)
