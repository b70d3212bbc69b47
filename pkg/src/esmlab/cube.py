"""Finite binary cubes {0,1}^n with the uniform product measure.

A point ``w`` of the cube is stored as an integer whose bit ``i`` is the
coordinate ``w_i``.  Subsets are boolean membership tables of length ``2**n``
indexed by that integer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import entr

MAX_N = 24
LOG2 = math.log(2.0)
DOMAIN_TOL = 1e-12


def binary_entropy(t: float) -> float:
    """h(t) = -t log t - (1-t) log(1-t) in nats, with 0 log 0 = 0."""
    t = float(t)
    if t < -DOMAIN_TOL or t > 1 + DOMAIN_TOL:
        raise ValueError(f"binary_entropy: t={t!r} outside [0, 1]")
    t = min(max(t, 0.0), 1.0)
    return float(entr(t) + entr(1.0 - t))


def h(t):
    """Vectorized binary entropy.  No domain check; inputs are clipped to [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return entr(t) + entr(1.0 - t)


def _check_n(n: int) -> int:
    n = int(n)
    if not 1 <= n <= MAX_N:
        raise ValueError(f"coordinate count n={n} outside [1, {MAX_N}]")
    return n


@dataclass(frozen=True)
class BitWord:
    n: int
    bits: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits={self.bits} does not fit in n={self.n} coordinates")

    def __getitem__(self, i: int) -> int:
        return (self.bits >> i) & 1

    @classmethod
    def from_coords(cls, coords: Sequence[int]) -> "BitWord":
        bits = 0
        for i, c in enumerate(coords):
            if c not in (0, 1):
                raise ValueError(f"coordinate {i} is {c!r}, expected 0 or 1")
            bits |= c << i
        return cls(len(coords), bits)

    def coords(self) -> tuple[int, ...]:
        return tuple(self[i] for i in range(self.n))


@dataclass(frozen=True)
class LinearOrder:
    """A linear order on the coordinates {0, ..., n-1}.

    ``rank[i]`` is the position of coordinate ``i``; coordinate ``a`` precedes
    ``b`` iff ``rank[a] < rank[b]``.
    """

    n: int
    rank: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        rank = tuple(int(r) for r in self.rank)
        if len(rank) != self.n or sorted(rank) != list(range(self.n)):
            raise ValueError(f"rank {self.rank!r} is not a permutation of range({self.n})")
        object.__setattr__(self, "rank", rank)

    @classmethod
    def natural(cls, n: int) -> "LinearOrder":
        return cls(n, tuple(range(n)))

    @classmethod
    def from_sequence(cls, seq: Sequence[int]) -> "LinearOrder":
        """Build the order that reveals coordinates in the order listed by ``seq``."""
        rank = [0] * len(seq)
        for pos, c in enumerate(seq):
            rank[c] = pos
        return cls(len(seq), tuple(rank))

    @property
    def sequence(self) -> tuple[int, ...]:
        """Coordinates listed from first to last revealed."""
        seq = [0] * self.n
        for c, r in enumerate(self.rank):
            seq[r] = c
        return tuple(seq)

    def precedes(self, a: int, b: int) -> bool:
        return self.rank[a] < self.rank[b]

    def transport(self, sigma: Sequence[int]) -> "LinearOrder":
        """The order sigma.< defined by x (sigma.<) y iff sigma^-1 x < sigma^-1 y."""
        inv = invert_permutation(sigma)
        return LinearOrder(self.n, tuple(self.rank[inv[x]] for x in range(self.n)))


def invert_permutation(sigma: Sequence[int]) -> list[int]:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    if sorted(sigma) != list(range(len(sigma))):
        raise ValueError(f"{sigma!r} is not a permutation")
    return inv


@dataclass(frozen=True, eq=False)
class CubeSubset:
    n: int
    membership: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        table = np.asarray(self.membership, dtype=bool)
        if table.shape != (1 << self.n,):
            raise ValueError(f"membership table has shape {table.shape}, expected ({1 << self.n},)")
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "membership", table)

    # -- constructors --------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "CubeSubset":
        return cls(n, np.zeros(1 << _check_n(n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> "CubeSubset":
        return cls(n, np.ones(1 << _check_n(n), dtype=bool))

    @classmethod
    def from_points(cls, n: int, points: Iterable[int | Sequence[int] | BitWord]) -> "CubeSubset":
        table = np.zeros(1 << _check_n(n), dtype=bool)
        for p in points:
            if isinstance(p, BitWord):
                p = p.bits
            elif not isinstance(p, (int, np.integer)):
                p = BitWord.from_coords(p).bits
            table[int(p)] = True
        return cls(n, table)

    @classmethod
    def cylinder(cls, n: int, coord: int, value: int = 1) -> "CubeSubset":
        """{w : w_coord = value}."""
        idx = np.arange(1 << _check_n(n))
        return cls(n, ((idx >> coord) & 1) == value)

    @classmethod
    def random(cls, n: int, size: int, rng: np.random.Generator) -> "CubeSubset":
        """Uniformly random subset with exactly ``size`` points."""
        table = np.zeros(1 << _check_n(n), dtype=bool)
        table[rng.choice(1 << n, size=size, replace=False)] = True
        return cls(n, table)

    # -- basic set algebra ---------------------------------------------
    def __len__(self) -> int:
        return int(self.membership.sum())

    def __contains__(self, w) -> bool:
        if isinstance(w, BitWord):
            w = w.bits
        return bool(self.membership[int(w)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubeSubset):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.membership, other.membership))

    def __hash__(self):
        return hash((self.n, self.membership.tobytes()))

    def _same_cube(self, other: "CubeSubset"):
        if self.n != other.n:
            raise ValueError(f"subsets live in different cubes (n={self.n} vs n={other.n})")

    def __or__(self, other: "CubeSubset") -> "CubeSubset":
        self._same_cube(other)
        return CubeSubset(self.n, self.membership | other.membership)

    def __and__(self, other: "CubeSubset") -> "CubeSubset":
        self._same_cube(other)
        return CubeSubset(self.n, self.membership & other.membership)

    def __sub__(self, other: "CubeSubset") -> "CubeSubset":
        self._same_cube(other)
        return CubeSubset(self.n, self.membership & ~other.membership)

    def complement(self) -> "CubeSubset":
        return CubeSubset(self.n, ~self.membership)

    def issubset(self, other: "CubeSubset") -> bool:
        self._same_cube(other)
        return not bool(np.any(self.membership & ~other.membership))

    def points(self) -> np.ndarray:
        return np.flatnonzero(self.membership)

    def permute(self, sigma: Sequence[int]) -> "CubeSubset":
        """Image under the coordinate permutation with (sigma w)_{sigma(i)} = w_i."""
        return CubeSubset(self.n, self.membership[permute_points(self.n, invert_permutation(sigma))])

    # -- serialization -------------------------------------------------
    def to_text(self) -> str:
        packed = np.packbits(self.membership, bitorder="little")
        return f"n={self.n};bits={packed.tobytes().hex()}"

    @classmethod
    def from_text(cls, text: str) -> "CubeSubset":
        try:
            head, body = text.strip().split(";")
            key_n, n = head.split("=")
            key_b, hexbits = body.split("=")
        except ValueError:
            raise ValueError(f"malformed cube subset line: {text!r}") from None
        if key_n.strip() != "n" or key_b.strip() != "bits":
            raise ValueError(f"malformed cube subset line: {text!r}")
        n = _check_n(int(n))
        raw = np.frombuffer(bytes.fromhex(hexbits.strip()), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        size = 1 << n
        if bits.size < size or bits[size:].any():
            raise ValueError(f"bitmap length does not match n={n}")
        return cls(n, bits[:size].astype(bool))


def permute_points(n: int, sigma: Sequence[int]) -> np.ndarray:
    """Integer image of every cube point under (sigma w)_{sigma(i)} = w_i."""
    idx = np.arange(1 << n)
    out = np.zeros_like(idx)
    for i, s in enumerate(sigma):
        out |= ((idx >> i) & 1) << s
    return out


def measure_exact(U: CubeSubset) -> Fraction:
    return Fraction(len(U), 1 << U.n)


def measure(U: CubeSubset) -> float:
    """mu(U) = |U| 2^-n (exact: dyadic rationals with n <= 24 are doubles)."""
    return float(measure_exact(U))


def subset_entropy(U: CubeSubset) -> float:
    return binary_entropy(measure(U))
