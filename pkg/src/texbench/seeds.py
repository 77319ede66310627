"""Deterministic RNG stream derivation.

Every random decision in the pipeline draws from a stream derived by hashing
a tuple of (seed, index, purpose) parts, so results depend only on logical
identity, never on execution order or worker count.
"""
from __future__ import annotations

import hashlib

import numpy as np
from scipy.special import ndtri

_MIN_UNIFORM = 2.0**-53  # keeps ndtri finite on the open unit interval


def derive_seed(*parts: int | str) -> int:
    """Hash a tuple of ints/strings into a 64-bit stream key."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, (int, np.integer)):
            payload = str(int(part)).encode()
            h.update(b"I")
        elif isinstance(part, str):
            payload = part.encode()
            h.update(b"S")
        else:
            raise TypeError(f"seed parts must be int or str, got {type(part)!r}")
        h.update(len(payload).to_bytes(4, "big"))
        h.update(payload)
    return int.from_bytes(h.digest(), "big")


def make_stream(*parts: int | str) -> np.random.Generator:
    """A counter-based generator keyed by the hashed parts."""
    return np.random.Generator(np.random.Philox(key=derive_seed(*parts)))


def stream_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def counter_normals(seed: int, shape: tuple[int, ...]) -> np.ndarray:
    """Standard-normal field addressed by (seed, flat index).

    Uniform draws consume exactly one counter slot each, so the value at any
    flat index is a pure function of the key and that index; inverse-CDF then
    maps uniforms to normals with no rejection-sampling order dependence.
    """
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    u = gen.random(shape)
    return ndtri(np.maximum(u, _MIN_UNIFORM))
