"""Counter-based iid labels keyed by (seed, group element).

A label is a pure function of the run seed, a stream number and the
element's canonical form.  Enlarging a ball or recentering it therefore
never changes the label of an element that was already present, and any
subset of labels can be regenerated independently of the others.
"""
from __future__ import annotations

import hashlib

import numpy as np

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer on Python ints."""
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a trial index (or nested indices); order-independent to compute."""
    s = mix64(int(seed) ^ _GOLDEN)
    for p in path:
        s = mix64((s + (int(p) + 1) * _GOLDEN) & _M64)
    return s


def element_key(element: tuple) -> int:
    digest = hashlib.blake2b(repr(tuple(element)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def element_keys(elements) -> np.ndarray:
    return np.array([element_key(g) for g in elements], dtype=np.uint64)


def raw_labels(seeds, keys, stream: int = 0) -> np.ndarray:
    """64-bit labels, shape broadcast(seeds[..., None], keys)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = mix64_array(seeds + np.uint64((stream + 1) * _GOLDEN & _M64))
        return mix64_array(base[..., None] ^ keys)


def uniform_labels(seeds, keys, stream: int = 0) -> np.ndarray:
    """Uniform labels in [0, 1) with 53 random bits."""
    return (raw_labels(seeds, keys, stream) >> np.uint64(11)).astype(np.float64) * 2.0**-53
