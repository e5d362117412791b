"""Deterministic hashing and seed derivation shared across the toolkit.

Python's builtin ``hash`` is salted per process, so anything that must
reproduce across machines (token ids, per-component seeds) goes through
FNV-1a instead.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: str | bytes) -> int:
    """64-bit FNV-1a hash of a string (UTF-8) or byte sequence."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(master_seed: int, component: str) -> int:
    """Stable per-component seed from a single master seed.

    Components are named like ``"corpus.split"`` or ``"forest.tree.17"``;
    the derivation is documented so runs replay across machines.
    """
    return fnv1a64(f"{master_seed}:{component}") & 0x7FFFFFFFFFFFFFFF


def rng_for(master_seed: int, component: str) -> np.random.Generator:
    """Seeded generator for one named component of a run."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, component)))
