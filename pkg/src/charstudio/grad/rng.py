"""Explicit seeded RNG plumbing — no global random state anywhere."""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def split_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent stream derived from (seed, stream index)."""
    return np.random.Generator(
        np.random.Philox(key=(int(seed) & 0xFFFFFFFFFFFFFFFF) + (int(stream) << 64))
    )


def rng_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def restore_rng(state: dict) -> np.random.Generator:
    bg = np.random.Philox()
    bg.state = state
    return np.random.Generator(bg)
