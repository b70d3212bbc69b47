"""Entropy support maps on finite cubes.

For a subset U, a revelation order and a coordinate i, the slice of a point w
is the set of cube points agreeing with w on every coordinate revealed before
i.  Everything here is computed from three slice densities:

    eps(w,i)   fraction of the slice lying in U
    eps0(w,i)  half the fraction of the sub-slice {w_i = 0} lying in U
    eps1(w,i)  same for {w_i = 1}

so that eps = eps0 + eps1.  The support set of U is stored as a height field
J(w,i) = 1_U(w) * delta(w,i) / eps(w,i); every fibre is the interval
[0, J(w,i)), hence unions and intersections of support sets are pointwise max
and min of heights.

Heights are not truncated at log 2: a half-cube already has height 2 log 2,
and truncation would break the mass identity  mass(J) = h(mu(U)).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cube import (
    LOG2,
    BitWord,
    CubeSubset,
    LinearOrder,
    h,
    invert_permutation,
    measure,
    permute_points,
)

ZERO_TOL = 1e-300


class SliceDensities(NamedTuple):
    """Either full arrays (..., 2**n, n) or one prefix-level slab (..., 2**k)."""

    eps: np.ndarray
    eps0: np.ndarray
    eps1: np.ndarray


class ConditionalDensities(NamedTuple):
    eps: float
    eps0: float
    eps1: float


def level_densities(tables: np.ndarray, order: LinearOrder) -> list[SliceDensities]:
    """Slice densities per revelation level, indexed by the revealed prefix.

    Entry k refers to the k-th revealed coordinate; its arrays have shape
    (..., 2**k), one value per prefix (values of the first k revealed
    coordinates, first one most significant).  Since every slice quantity
    depends on w only through that prefix, integrals over the cube are plain
    means over the last axis.  Cost O(2**n) per table.
    """
    tables = np.asarray(tables)
    n = order.n
    lead = tables.shape[:-1]
    if tables.shape[-1] != 1 << n:
        raise ValueError(f"tables have {tables.shape[-1]} points, order expects {1 << n}")
    # C-order reshape puts coordinate c on axis (n-1-c); rearrange so that
    # axis k holds the k-th revealed coordinate.
    nl = len(lead)
    perm = list(range(nl)) + [nl + (n - 1 - c) for c in order.sequence]
    M = tables.astype(float).reshape(lead + (2,) * n).transpose(perm)
    levels = [None] * n
    for k in range(n - 1, -1, -1):
        flat = M.reshape(lead + (1 << (k + 1),))
        e0 = 0.5 * flat[..., 0::2]
        e1 = 0.5 * flat[..., 1::2]
        eps = e0 + e1
        levels[k] = SliceDensities(eps, e0, e1)
        M = eps
    return levels


def expand_levels(levels: Sequence, order: LinearOrder) -> np.ndarray:
    """Broadcast prefix-level arrays to shape (..., 2**n, n) indexed by (w, coordinate)."""
    n = order.n
    seq = order.sequence
    lead = levels[0].shape[:-1]
    nl = len(lead)
    perm = list(range(nl)) + [nl + (n - 1 - c) for c in seq]
    back = np.argsort(perm)
    out = np.empty(lead + (1 << n, n))
    full = lead + (2,) * n
    for k, c in enumerate(seq):
        arr = np.asarray(levels[k]).reshape(lead + (2,) * k + (1,) * (n - k))
        out[..., c] = np.broadcast_to(arr, full).transpose(back).reshape(lead + (1 << n,))
    return out


def slice_densities(tables: np.ndarray, order: LinearOrder) -> SliceDensities:
    """Slice densities at every (w, i); arrays of shape (..., 2**n, n)."""
    levels = level_densities(tables, order)
    return SliceDensities(*(expand_levels([lv[j] for lv in levels], order) for j in range(3)))


def delta_from_densities(eps, eps0, eps1):
    """delta = h(eps) - h(2 eps0)/2 - h(2 eps1)/2, clamped at 0 against rounding."""
    d = h(eps) - 0.5 * h(2.0 * eps0) - 0.5 * h(2.0 * eps1)
    return np.maximum(d, 0.0)


def _safe_div(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast(a, b).shape)
    np.divide(a, b, out=out, where=b > ZERO_TOL)
    return out


def delta_alternate(eps, eps0, eps1):
    """delta rewritten as H(Z_i) - H(Z_i | U) on the slice.

    eps*(log 2 - h(eps0/eps)) + (1-eps)*(log 2 - h((1/2 - eps0)/(1 - eps))),
    with a vanishing weight killing its term.
    """
    eps = np.asarray(eps, dtype=float)
    inside = eps * (LOG2 - h(_safe_div(eps0, eps)))
    outside = (1.0 - eps) * (LOG2 - h(_safe_div(0.5 - np.asarray(eps0), 1.0 - eps)))
    return inside + outside


def heights_from_densities(tables, dens: SliceDensities):
    """J = 1_U * delta / eps, zero off U."""
    d = delta_from_densities(*dens)
    mask = np.asarray(tables, dtype=bool)[..., None]
    J = _safe_div(d, dens.eps)
    return np.where(mask, J, 0.0)


# ---------------------------------------------------------------------------
# pointwise API


def _check_coordinate(order: LinearOrder, i: int):
    if not 0 <= i < order.n:
        raise ValueError(f"coordinate {i} outside [0, {order.n})")


def _word(w, n):
    if isinstance(w, BitWord):
        if w.n != n:
            raise ValueError(f"word has n={w.n}, cube has n={n}")
        return w.bits
    return int(w)


def conditional_densities(U: CubeSubset, order: LinearOrder, w, i: int) -> ConditionalDensities:
    """Slice densities at a single (w, i), by direct counting over the slice."""
    _check_coordinate(order, i)
    if order.n != U.n:
        raise ValueError("order and subset have different n")
    w = _word(w, U.n)
    before = [j for j in range(U.n) if order.precedes(j, i)]
    mask = sum(1 << j for j in before)
    idx = np.arange(1 << U.n)
    in_slice = (idx & mask) == (w & mask)
    size = int(in_slice.sum())
    bit = (idx >> i) & 1
    inU = U.membership
    eps = np.count_nonzero(inU & in_slice) / size
    eps0 = 0.5 * np.count_nonzero(inU & in_slice & (bit == 0)) / (size / 2)
    eps1 = 0.5 * np.count_nonzero(inU & in_slice & (bit == 1)) / (size / 2)
    return ConditionalDensities(float(eps), float(eps0), float(eps1))


def delta(U: CubeSubset, order: LinearOrder, w, i: int) -> float:
    """Entropy drop of 1_U on the slice of w when coordinate i is revealed."""
    e = conditional_densities(U, order, w, i)
    return float(delta_from_densities(e.eps, e.eps0, e.eps1))


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class EsmField:
    n: int
    order: LinearOrder
    heights: np.ndarray = field(repr=False)
    source_measure: float

    def __post_init__(self):
        heights = np.asarray(self.heights, dtype=float)
        if heights.shape != (1 << self.n, self.n):
            raise ValueError(f"heights have shape {heights.shape}, expected {(1 << self.n, self.n)}")
        if np.any(heights < 0):
            raise ValueError("heights must be nonnegative")
        heights = heights.copy()
        heights.flags.writeable = False
        object.__setattr__(self, "heights", heights)

    def height(self, w, i: int) -> float:
        return float(self.heights[_word(w, self.n), i])

    def to_csv(self) -> str:
        """Header line ``n,order_permutation,mass`` then rows ``w_hex,i,J``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "order_permutation", "mass"])
        writer.writerow([self.n, " ".join(map(str, self.order.sequence)), f"{field_mass(self):.9g}"])
        writer.writerow(["w_hex", "i", "J"])
        width = max(1, (self.n + 3) // 4)
        for w in range(1 << self.n):
            for i in range(self.n):
                writer.writerow([f"{w:0{width}x}", i, f"{self.heights[w, i]:.9g}"])
        return buf.getvalue()


def esm_field(U: CubeSubset, order: LinearOrder) -> EsmField:
    if order.n != U.n:
        raise ValueError("order and subset have different n")
    dens = slice_densities(U.membership, order)
    J = heights_from_densities(U.membership, dens)
    return EsmField(U.n, order, J, measure(U))


def field_mass(f: EsmField) -> float:
    return float(f.heights.sum() / (1 << f.n))


def batch_field_masses(tables: np.ndarray, order: LinearOrder) -> np.ndarray:
    """Masses of the support fields of a stack of membership tables (..., 2**n)."""
    dens = slice_densities(tables, order)
    J = heights_from_densities(tables, dens)
    return J.sum(axis=(-2, -1)) / (1 << order.n)


class PairMasses(NamedTuple):
    intersection: float
    union: float
    symdiff: float


def pair_masses(fU: EsmField, fV: EsmField) -> PairMasses:
    """Masses of the intersection, union and symmetric difference of two support sets."""
    if fU.n != fV.n or fU.order != fV.order:
        raise ValueError("fields differ in n or order")
    scale = 1.0 / (1 << fU.n)
    a, b = fU.heights, fV.heights
    return PairMasses(
        float(np.minimum(a, b).sum() * scale),
        float(np.maximum(a, b).sum() * scale),
        float(np.abs(a - b).sum() * scale),
    )


def excess_integrand(dU: SliceDensities, dV: SliceDensities):
    """delta_V - (eps_V/eps_U) delta_U pointwise; positive part is the union excess density."""
    DU = delta_from_densities(*dU)
    DV = delta_from_densities(*dV)
    return DV - _safe_div(dV.eps, dU.eps) * DU


def union_excess(U: CubeSubset, V: CubeSubset, order: LinearOrder) -> float:
    """mass(support(U) | support(V)) - mass(support(U)) for V inside U,
    integrated from the slice formula max{0, delta_V - (eps_V/eps_U) delta_U}."""
    if not V.issubset(U):
        raise ValueError("union_excess requires V to be a subset of U")
    total = 0.0
    for dU, dV in zip(level_densities(U.membership, order), level_densities(V.membership, order)):
        total += float(np.maximum(excess_integrand(dU, dV), 0.0).mean())
    return total


def check_equivariance(U: CubeSubset, order: LinearOrder, sigma: Sequence[int]) -> float:
    """max |J_{sigma U, sigma <}(sigma w, sigma i) - J_{U,<}(w, i)| over all (w, i)."""
    sigma = list(sigma)
    invert_permutation(sigma)  # validates
    J = esm_field(U, order).heights
    Js = esm_field(U.permute(sigma), order.transport(sigma)).heights
    img = permute_points(U.n, sigma)
    return float(np.max(np.abs(Js[img][:, sigma] - J)))


def sample_uniform_order(n: int, seed) -> LinearOrder:
    """Uniform random order on n coordinates (seeded Fisher-Yates shuffle)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return LinearOrder.from_sequence(rng.permutation(n).tolist())
