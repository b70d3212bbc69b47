"""Inequalities behind approximate additivity of the entropy support map.

All pointwise quantities for a pair V <= U depend only on the six slice
densities of U and V at (w, i), so they are computed on prefix-level slabs
(see ``esm.level_densities``) and integrated as means over prefixes.

Checks compare ``lhs <= rhs + TOL`` with an additive tolerance. A check is
``ok``, ``violated``, or ``skipped`` when its side conditions fail at that
point.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.special import entr

from .cube import LOG2, CubeSubset, LinearOrder, binary_entropy, h, measure
from .esm import (
    SliceDensities,
    _safe_div,
    conditional_densities,
    delta_alternate,
    delta_from_densities,
    level_densities,
    sample_uniform_order,
    union_excess,
)

TOL = 1e-9

# Admissible region thresholds used by the sweeps: kappa0 < 1/4,
# kappa1 <= 1/8, kappa2 <= kappa1/8.
DEFAULT_KAPPAS = (0.2, 0.125, 0.125 / 8)
S1_KAPPA = 0.1


class HypothesisError(ValueError):
    """Raised when the standing hypotheses of a bound cannot hold."""


class Check(NamedTuple):
    status: str  # "ok", "violated" or "skipped"
    lhs: float
    rhs: float

    def __bool__(self):
        return self.status != "violated"


def _check(lhs, rhs, applicable=True) -> Check:
    if not applicable:
        return Check("skipped", float(lhs), float(rhs))
    return Check("ok" if lhs <= rhs + TOL else "violated", float(lhs), float(rhs))


def validate_kappas(kappa0: float, kappa1: float, kappa2: float):
    if not (0 < kappa0 < 0.25 and 0 < kappa1 <= 0.125 and 0 < kappa2 <= kappa1 / 8):
        raise HypothesisError(
            f"need 0<kappa0<1/4, 0<kappa1<=1/8, 0<kappa2<=kappa1/8; got {kappa0}, {kappa1}, {kappa2}"
        )


def asymptotic_kappas(mu: float) -> tuple[float, float, float]:
    """The thresholds (|log mu|^-1/3, |log mu|^-1/3, |log mu|^-1).

    They satisfy the standing hypotheses only once |log mu| >= 512, i.e. far
    below any density representable on a cube with n <= 24.
    """
    L = -math.log(mu)
    return L ** (-1 / 3), L ** (-1 / 3), 1.0 / L


# ---------------------------------------------------------------------------
# vectorized pair terms


def _h3(a, b, c):
    return entr(np.clip(a, 0, 1)) + entr(np.clip(b, 0, 1)) + entr(np.clip(c, 0, 1))


def joint_delta_from_densities(dU: SliceDensities, dV: SliceDensities):
    """Entropy drop of the three-valued variable (in V / in U\\V / outside U)."""
    before = _h3(dV.eps, dU.eps - dV.eps, 1.0 - dU.eps)
    after0 = _h3(2 * dV.eps0, 2 * (dU.eps0 - dV.eps0), 1.0 - 2 * dU.eps0)
    after1 = _h3(2 * dV.eps1, 2 * (dU.eps1 - dV.eps1), 1.0 - 2 * dU.eps1)
    return before - 0.5 * after0 - 0.5 * after1


class PairTerms(NamedTuple):
    eps_u: np.ndarray
    eps_v: np.ndarray
    delta_u: np.ndarray
    delta_v: np.ndarray
    joint: np.ndarray
    p_u: np.ndarray  # eps0_U / eps_U
    p_v: np.ndarray
    alpha: np.ndarray  # eps_V / eps_U
    s1: np.ndarray
    s1_closed: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    x: np.ndarray  # delta_V - alpha delta_U
    r: np.ndarray


def pair_terms(dU: SliceDensities, dV: SliceDensities) -> PairTerms:
    eU, eV = dU.eps, dV.eps
    DU = delta_from_densities(*dU)
    DV = delta_from_densities(*dV)
    joint = joint_delta_from_densities(dU, dV)
    pU = _safe_div(dU.eps0, eU)
    pV = _safe_div(dV.eps0, eV)
    eD = eU - eV
    pD = _safe_div(dU.eps0 - dV.eps0, eD)
    alpha = _safe_div(eV, eU)
    s1 = joint - DU
    s1_closed = eU * h(pU) - eV * h(pV) - eD * h(pD)
    s2 = eV * (h(pU) - h(pV))
    x = DV - alpha * DU
    s3 = x - s2
    return PairTerms(eU, eV, DU, DV, joint, pU, pV, alpha, s1, s1_closed, s2, s3, x, np.maximum(x, 0.0))


def classify_regions(t: PairTerms, kappa0: float, kappa1: float) -> np.ndarray:
    """Region index 1..5 per point, assigned in priority order."""
    region = np.full(t.x.shape, 5, dtype=np.int8)
    region[t.alpha > 1 - kappa1] = 4
    region[t.alpha < kappa1] = 3
    region[t.eps_u > kappa0] = 2
    region[t.x < 0] = 1
    return region


# ---------------------------------------------------------------------------
# pointwise API


def _require_subset(U: CubeSubset, V: CubeSubset):
    if not V.issubset(U):
        raise ValueError("V must be a subset of U")


def _point(U, V, order, w, i):
    cU = conditional_densities(U, order, w, i)
    cV = conditional_densities(V, order, w, i)
    dU = SliceDensities(*(np.asarray(v, dtype=float) for v in cU))
    dV = SliceDensities(*(np.asarray(v, dtype=float) for v in cV))
    return pair_terms(dU, dV)


def joint_delta(U: CubeSubset, V: CubeSubset, order: LinearOrder, w, i: int) -> float:
    _require_subset(U, V)
    return float(_point(U, V, order, w, i).joint)


@dataclass(frozen=True)
class DecompositionTerms:
    s1: float
    s2: float
    s3: float
    r: float
    region: int
    kappa0: float
    kappa1: float
    kappa2: float
    s1_closed: float


def s_terms(U, V, order, w, i, kappa0, kappa1, kappa2) -> DecompositionTerms:
    _require_subset(U, V)
    validate_kappas(kappa0, kappa1, kappa2)
    t = _point(U, V, order, w, i)
    region = int(classify_regions(t, kappa0, kappa1))
    return DecompositionTerms(
        float(t.s1), float(t.s2), float(t.s3), float(t.r), region,
        kappa0, kappa1, kappa2, float(t.s1_closed),
    )


def check_hquad(x: float) -> tuple[bool, bool]:
    """2(x-1/2)^2 <= |h(x) - h(1/2)| <= 8(x-1/2)^2."""
    if not 0 < x < 1:
        raise ValueError("check_hquad needs 0 < x < 1")
    gap = abs(binary_entropy(x) - LOG2)
    q = (x - 0.5) ** 2
    return 2 * q <= gap + TOL, gap <= 8 * q + TOL


def _s1_lower(t: PairTerms, kappa):
    applicable = (t.eps_u > 0) & (t.alpha >= kappa) & (t.alpha <= 1 - kappa)
    rhs_lb = 2 * kappa * t.eps_u * (t.p_u - t.p_v) ** 2
    # stored as lhs <= rhs: lower bound <= |s1|
    return applicable, rhs_lb, np.abs(t.s1)


def check_s1_lower(U, V, order, w, i, kappa) -> Check:
    _require_subset(U, V)
    app, lhs, rhs = _s1_lower(_point(U, V, order, w, i), kappa)
    return _check(lhs, rhs, bool(app))


def _delta_approx(eps, eps0, D):
    """Both sides of 0 <= D - eps(log2 - h(p)) <= 16 eps D, as two (lhs, rhs) pairs."""
    mid = D - eps * (LOG2 - h(_safe_div(eps0, eps)))
    applicable = (eps > 0) & (eps <= 0.25)
    return applicable, (np.zeros_like(mid), mid), (mid, 16 * eps * D)


def check_delta_approx(U, order, w, i) -> Check:
    c = conditional_densities(U, order, w, i)
    D = delta_from_densities(*c)
    app, lo, hi = _delta_approx(np.asarray(c.eps), np.asarray(c.eps0), D)
    # report the tighter of the two sides
    slack_lo = float(lo[0] - lo[1])
    slack_hi = float(hi[0] - hi[1])
    lhs, rhs = (lo if slack_lo >= slack_hi else hi)
    return _check(lhs, rhs, bool(app))


def _s3(t: PairTerms):
    applicable = (t.eps_u > 0) & (t.eps_u <= 0.25)
    return applicable, np.abs(t.s3), 16 * (t.eps_u * t.delta_u + t.eps_v * t.delta_v)


def check_s3(U, V, order, w, i) -> Check:
    _require_subset(U, V)
    app, lhs, rhs = _s3(_point(U, V, order, w, i))
    return _check(lhs, rhs, bool(app))


def _s2(t: PairTerms, kappa1, kappa2):
    applicable = (t.eps_u > 0) & (t.alpha >= kappa1) & (t.alpha <= 1 - kappa1)
    s1 = np.maximum(t.s1, 0.0)
    rhs = (
        -8 * kappa1 ** -0.5 * math.log(kappa2) * (np.sqrt(t.delta_u * s1) + np.sqrt(t.delta_v * s1))
        + 4 * binary_entropy(2 * kappa2 / kappa1) * t.delta_u
    )
    return applicable, np.abs(t.s2), rhs


def check_s2(U, V, order, w, i, kappa1, kappa2) -> Check:
    _require_subset(U, V)
    if not (0 < kappa1 < 0.25 and 0 < kappa2 <= kappa1 / 8):
        raise HypothesisError("need kappa1 < 1/4 and kappa2 <= kappa1/8")
    app, lhs, rhs = _s2(_point(U, V, order, w, i), kappa1, kappa2)
    return _check(lhs, rhs, bool(app))


# ---------------------------------------------------------------------------
# region integrals


@dataclass(frozen=True)
class RegionIntegrals:
    integrals: tuple[float, float, float, float, float]
    bounds: tuple[float, float, float, float, float]
    kappas: tuple[float, float, float]
    union_excess: float

    @property
    def total(self) -> float:
        return float(sum(self.integrals))

    def violations(self) -> list[int]:
        return [d + 1 for d, (I, b) in enumerate(zip(self.integrals, self.bounds)) if I > b + TOL]


def region_bounds(mu_u: float, kappa0: float, kappa1: float, kappa2: float):
    H = binary_entropy(mu_u)
    return (
        0.0,
        -4 * mu_u * math.log(kappa0),
        binary_entropy(kappa0 * kappa1) / binary_entropy(kappa0) * H,
        kappa1 * H + mu_u,
        (32 * kappa0 + 4 * binary_entropy(2 * kappa2 / kappa1)) * H
        - 16 * kappa1 ** -0.5 * math.log(kappa2) * math.sqrt(H * mu_u),
    )


def _region_sums(levelsU, levelsV, kappa0, kappa1):
    """Per-region integrals of r, for batched prefix-level slabs."""
    lead = levelsU[0].eps.shape[:-1]
    sums = np.zeros(lead + (5,))
    for dU, dV in zip(levelsU, levelsV):
        t = pair_terms(dU, dV)
        reg = classify_regions(t, kappa0, kappa1)
        for d in range(5):
            sums[..., d] += np.where(reg == d + 1, t.r, 0.0).mean(axis=-1)
    return sums


def region_integrals(U: CubeSubset, V: CubeSubset, order: LinearOrder, kappas=None) -> RegionIntegrals:
    """Split the union excess over the five regions and evaluate each region's bound.

    ``kappas=None`` uses the asymptotic thresholds of ``asymptotic_kappas``, which
    raise ``HypothesisError`` at every density reachable here; pass an
    admissible triple such as ``DEFAULT_KAPPAS`` instead.
    """
    _require_subset(U, V)
    mu = measure(U)
    if mu == 0:
        raise HypothesisError("U is empty")
    k0, k1, k2 = asymptotic_kappas(mu) if kappas is None else kappas
    validate_kappas(k0, k1, k2)
    if mu > k0:
        raise HypothesisError(f"mu(U)={mu} exceeds kappa0={k0}")
    sums = _region_sums(level_densities(U.membership, order), level_densities(V.membership, order), k0, k1)
    return RegionIntegrals(
        tuple(float(s) for s in sums),
        region_bounds(mu, k0, k1, k2),
        (k0, k1, k2),
        union_excess(U, V, order),
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class Tally:
    checked: int = 0
    skipped: int = 0
    violated: int = 0
    max_slack: float = -math.inf  # largest lhs - rhs over checked points

    def add(self, applicable, lhs, rhs):
        applicable = np.broadcast_to(applicable, np.shape(lhs))
        n_app = int(np.count_nonzero(applicable))
        self.skipped += int(applicable.size - n_app)
        self.checked += n_app
        if n_app:
            slack = (np.asarray(lhs) - np.asarray(rhs))[applicable]
            self.violated += int(np.count_nonzero(slack > TOL))
            self.max_slack = max(self.max_slack, float(slack.max()))

    def merge(self, other: "Tally"):
        self.checked += other.checked
        self.skipped += other.skipped
        self.violated += other.violated
        self.max_slack = max(self.max_slack, other.max_slack)

    @property
    def exercised(self) -> bool:
        return self.checked > 0

    def as_dict(self):
        return {
            "checked": self.checked,
            "skipped": self.skipped,
            "violated": self.violated,
            "max_slack": None if self.checked == 0 else self.max_slack,
        }


CHECKS = (
    "delta_alternate",
    "hquad",
    "s1_nonnegative",
    "s1_closed_form",
    "s1_lower",
    "delta_approx",
    "s3",
    "s2",
    "excess_split",
    "regions",
    "s1_integral",
)


@dataclass
class SweepReport:
    tallies: dict = field(default_factory=lambda: {name: Tally() for name in CHECKS})
    pairs: int = 0

    def merge(self, other: "SweepReport"):
        self.pairs += other.pairs
        for k, t in other.tallies.items():
            self.tallies[k].merge(t)

    @property
    def total_violations(self) -> int:
        return sum(t.violated for t in self.tallies.values())

    def as_dict(self):
        return {"pairs": self.pairs, "checks": {k: t.as_dict() for k, t in self.tallies.items()}}


def check_batch(
    U_tables: np.ndarray,
    V_tables: np.ndarray,
    order: LinearOrder,
    kappas=DEFAULT_KAPPAS,
    s1_kappa: float = S1_KAPPA,
) -> SweepReport:
    """Run every checker on a batch of pairs V <= U sharing one order."""
    U_tables = np.asarray(U_tables, dtype=bool)
    V_tables = np.asarray(V_tables, dtype=bool)
    if np.any(V_tables & ~U_tables):
        raise ValueError("every V must be a subset of its U")
    k0, k1, k2 = kappas
    validate_kappas(k0, k1, k2)
    rep = SweepReport(pairs=len(U_tables))
    T = rep.tallies
    LU = level_densities(U_tables, order)
    LV = level_densities(V_tables, order)
    s1_int = np.zeros(len(U_tables))
    excess = np.zeros(len(U_tables))
    for dU, dV in zip(LU, LV):
        t = pair_terms(dU, dV)
        for d in (dU, dV):
            D = delta_from_densities(*d)
            T["delta_alternate"].add(True, np.abs(D - delta_alternate(*d)), 0.0)
            app, lo, hi = _delta_approx(d.eps, d.eps0, D)
            T["delta_approx"].add(app, *lo)
            T["delta_approx"].add(app, *hi)
        # quadratic sandwich at every interior conditional ratio met in the sweep
        for p in (t.p_u, t.p_v):
            inside = (p > 0) & (p < 1)
            gap = np.abs(h(p) - LOG2)
            q = (p - 0.5) ** 2
            T["hquad"].add(inside, 2 * q, gap)
            T["hquad"].add(inside, gap, 8 * q)
        T["s1_nonnegative"].add(True, -t.s1, 0.0)
        T["s1_closed_form"].add(True, np.abs(t.s1 - t.s1_closed), 0.0)
        T["s1_lower"].add(*_s1_lower(t, s1_kappa))
        T["s3"].add(*_s3(t))
        T["s2"].add(*_s2(t, k1, k2))
        reg = classify_regions(t, k0, k1)
        T["excess_split"].add(True, np.abs(t.s2 + t.s3 - t.x), 0.0)
        s1_int += t.s1.mean(axis=-1)
        excess += t.r.mean(axis=-1)
        # r vanishes on region 1
        T["regions"].add(True, np.abs(np.where(reg == 1, t.r, 0.0)).max(axis=-1), 0.0)

    mu_u = U_tables.mean(axis=-1)
    mu_v = V_tables.mean(axis=-1)
    expect = mu_u * h(_safe_div(mu_v, mu_u))
    T["s1_integral"].add(True, np.abs(s1_int - expect), 0.0)
    T["s1_integral"].add(True, s1_int, mu_u)

    ok = (mu_u > 0) & (mu_u <= k0)
    if np.any(ok):
        sums = _region_sums([SliceDensities(*(a[ok] for a in d)) for d in LU],
                            [SliceDensities(*(a[ok] for a in d)) for d in LV], k0, k1)
        bnds = np.array([region_bounds(float(m), k0, k1, k2) for m in mu_u[ok]])
        T["regions"].add(True, sums, bnds)
        T["regions"].add(True, np.abs(sums.sum(axis=-1) - excess[ok]), 0.0)
    T["regions"].skipped += int(np.count_nonzero(~ok))
    return rep


def check_hquad_grid(step: float = 0.01) -> Tally:
    tally = Tally()
    xs = np.arange(step, 1.0 - step / 2, step)
    gap = np.abs(h(xs) - LOG2)
    q = (xs - 0.5) ** 2
    tally.add(True, 2 * q, gap)
    tally.add(True, gap, 8 * q)
    return tally


def _submask_tables(n: int, u: int) -> np.ndarray:
    pts = [p for p in range(1 << n) if (u >> p) & 1]
    k = len(pts)
    sel = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1).astype(bool)
    V = np.zeros((1 << k, 1 << n), dtype=bool)
    if k:
        V[:, pts] = sel
    return V


def exhaustive_pairs(n: int = 4, max_size: int = 8, batch: int = 50_000) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """All pairs V <= U of subsets of {0,1}^n with |U| <= max_size, in batches."""
    Ub, Vb, count = [], [], 0
    for size in range(max_size + 1):
        for pts in itertools.combinations(range(1 << n), size):
            u = sum(1 << p for p in pts)
            V = _submask_tables(n, u)
            U = np.zeros((len(V), 1 << n), dtype=bool)
            U[:, list(pts)] = True
            Ub.append(U)
            Vb.append(V)
            count += len(V)
            if count >= batch:
                yield np.concatenate(Ub), np.concatenate(Vb)
                Ub, Vb, count = [], [], 0
    if Ub:
        yield np.concatenate(Ub), np.concatenate(Vb)


def exhaustive_sweep(n: int = 4, max_size: int = 8, orders: Sequence[LinearOrder] | None = None, **kw) -> SweepReport:
    """Run every check over all pairs V <= U with |U| <= max_size.

    The pair family is closed under coordinate permutations and every
    pointwise quantity is equivariant, so the natural order alone already
    visits every (U, V, order) record; ``orders`` may list others anyway.
    """
    orders = [LinearOrder.natural(n)] if orders is None else list(orders)
    rep = SweepReport()
    for Ut, Vt in exhaustive_pairs(n, max_size):
        for o in orders:
            rep.merge(check_batch(Ut, Vt, o, **kw))
    rep.tallies["hquad"].merge(check_hquad_grid())
    return rep


def random_triples(n: int, count: int, seed, log2_density=(-11.0, -1.0)):
    """Random (U, V <= U, order): log-uniform density for U, uniform thinning rate for V."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        lo, hi = log2_density
        size = max(1, int(round(2.0 ** rng.uniform(lo, hi) * (1 << n))))
        U = np.zeros(1 << n, dtype=bool)
        U[rng.choice(1 << n, size=size, replace=False)] = True
        V = U & (rng.random(1 << n) < rng.uniform(0.0, 1.0))
        yield U, V, sample_uniform_order(n, rng)


def random_sweep(n: int = 12, count: int = 10_000, seed=0, **kw) -> SweepReport:
    rep = SweepReport()
    for U, V, o in random_triples(n, count, seed):
        rep.merge(check_batch(U[None], V[None], o, **kw))
    return rep


# ---------------------------------------------------------------------------
# excess-rate experiment


def rate_profile(mu):
    """log|log mu| / |log mu|^(1/3)."""
    L = np.abs(np.log(np.asarray(mu, dtype=float)))
    return np.log(L) / np.cbrt(L)


@dataclass
class RateTable:
    rows: list  # dicts with mu, excess_mean, excess_sd, bound
    C: float


def excess_rate_experiment(n: int, densities: Sequence[float], trials: int, seed) -> RateTable:
    """Mean relative union excess of random U and a 1/2-thinning V, per density.

    Each trial draws |U| = density * 2^n points uniformly, keeps each point of
    U in V with probability 1/2 and reveals coordinates in a uniform order.
    The constant C of C log|log mu| / |log mu|^(1/3) is fitted by least
    squares through the origin over densities where the profile is positive.
    """
    root = np.random.SeedSequence(seed)
    rows = []
    for d_idx, (dens, ss) in enumerate(zip(densities, root.spawn(len(densities)))):
        size = int(round(dens * (1 << n)))
        if size < 1 or size > (1 << n):
            raise ValueError(f"density {dens} not achievable at n={n}")
        vals = []
        for tss in ss.spawn(trials):
            rng = np.random.default_rng(tss)
            U = CubeSubset.random(n, size, rng)
            V = CubeSubset(n, U.membership & (rng.random(1 << n) < 0.5))
            order = sample_uniform_order(n, rng)
            H = binary_entropy(measure(U))
            vals.append(union_excess(U, V, order) / H if H > 0 else 0.0)
        vals = np.asarray(vals)
        rows.append({
            "mu": size / (1 << n),
            "excess_mean": float(vals.mean()),
            "excess_sd": float(vals.std(ddof=1)) if trials > 1 else 0.0,
        })
    mus = np.array([r["mu"] for r in rows])
    y = np.array([r["excess_mean"] for r in rows])
    x = rate_profile(mus)
    use = np.isfinite(x) & (x > 0)
    C = float((x[use] @ y[use]) / (x[use] @ x[use])) if use.any() else math.nan
    for r, xi in zip(rows, x):
        r["bound"] = float(C * xi) if np.isfinite(xi) else math.nan
    return RateTable(rows, C)


# ---------------------------------------------------------------------------
# projective metric


def proj_distance(u, v) -> float:
    """||u ^ v|| / (||u|| ||v||), the sine of the angle between the lines."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be vectors of equal length")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("zero vector has no projective class")
    outer = np.outer(u, v)
    wedge = outer - outer.T
    return float(min(1.0, math.sqrt(0.5 * np.sum(wedge**2)) / (nu * nv)))


def min_sup_ratio(u, v) -> tuple[float, float]:
    """min over lambda of ||u - lambda v||_inf / ||u||_inf, and the minimizing lambda.

    The objective is convex piecewise linear in lambda, so the minimum sits at
    a kink: some u_i/v_i or a crossing (u_i -+ u_j)/(v_i -+ v_j).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cands = [0.0]
    nz = v != 0
    cands.extend((u[nz] / v[nz]).tolist())
    for i, j in itertools.combinations(range(len(u)), 2):
        for sgn in (1.0, -1.0):
            den = v[i] - sgn * v[j]
            if den != 0:
                cands.append((u[i] - sgn * u[j]) / den)
    cands = np.asarray(cands)
    vals = np.max(np.abs(u[None, :] - cands[:, None] * v[None, :]), axis=1)
    k = int(np.argmin(vals))
    return float(vals[k] / np.max(np.abs(u))), float(cands[k])


@dataclass
class ProjReport:
    distance: float
    pairwise_max: float
    metric_ok: bool
    sup_ratio: float
    projection_ratio: float
    constant: float
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.metric_ok and self.lower_ok and self.upper_ok


def check_proj_sandwich(u, v) -> ProjReport:
    """Pairwise-restriction bound on the projective metric and the sup-norm sandwich with C = n."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = len(u)
    d = proj_distance(u, v)
    pair = 0.0
    for i, j in itertools.combinations(range(n), 2):
        ui, vi = u[[i, j]], v[[i, j]]
        if np.any(ui) and np.any(vi):
            pair = max(pair, proj_distance(ui, vi))
    metric_ok = d <= (n - 1) * pair + TOL
    ratio, _ = min_sup_ratio(u, v)
    lam0 = float(u @ v) / float(v @ v)
    proj_ratio = float(np.max(np.abs(u - lam0 * v)) / np.max(np.abs(u)))
    C = float(n)
    return ProjReport(
        d, pair, metric_ok, ratio, proj_ratio, C,
        lower_ok=d / C <= ratio + TOL,
        upper_ok=ratio <= proj_ratio + TOL and proj_ratio <= C * d + TOL,
    )


def random_positive_pair(rng: np.random.Generator, dim: int):
    """Two positive vectors with log-uniform entries over four decades."""
    return 10.0 ** rng.uniform(-2, 2, size=dim), 10.0 ** rng.uniform(-2, 2, size=dim)


def proj_sweep(count: int, dims=range(2, 9), seed=0) -> dict:
    """Check the projective-metric sandwich on ``count`` random positive pairs, dimensions cycling through ``dims``."""
    rng = np.random.default_rng(seed)
    dims = list(dims)
    out = {"checked": 0, "metric_violations": 0, "lower_violations": 0, "upper_violations": 0,
           "max_lower_ratio": 0.0, "max_upper_ratio": 0.0}
    for k in range(count):
        u, v = random_positive_pair(rng, dims[k % len(dims)])
        rep = check_proj_sandwich(u, v)
        out["checked"] += 1
        out["metric_violations"] += not rep.metric_ok
        out["lower_violations"] += not rep.lower_ok
        out["upper_violations"] += not rep.upper_ok
        if rep.sup_ratio > 0:
            out["max_lower_ratio"] = max(out["max_lower_ratio"], rep.distance / rep.constant / rep.sup_ratio)
        if rep.distance > 0:
            out["max_upper_ratio"] = max(out["max_upper_ratio"], rep.projection_ratio / (rep.constant * rep.distance))
    return out
