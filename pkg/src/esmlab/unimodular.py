"""Rooted random subsets of a group: finite unimodular examples, mass transport,
cylinder fingerprints and the weak-* distance between them."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .fiid import CHUNK, LocalRule, _ball, _keys, _pool_map, neighborhood_table
from .groups import Element, GroupSpec
from .labels import derive_seed, uniform_labels

PROB_TOL = 1e-12
MAX_TRACKED_BALL = 400


@dataclass(frozen=True, eq=False)
class RootedSetDistribution:
    spec: GroupSpec
    atoms: tuple  # ((frozenset of elements, probability), ...)
    exact: bool = True
    samples: int | None = None

    def __post_init__(self):
        e = self.spec.identity()
        total = 0.0
        for A, p in self.atoms:
            if e not in A:
                raise ValueError("every atom must contain the identity")
            if p < 0:
                raise ValueError("negative probability")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}")

    def __iter__(self):
        return iter(self.atoms)


def translate(spec: GroupSpec, g: Element, A: Iterable[Element]) -> frozenset:
    return frozenset(spec.multiply(g, x) for x in A)


def finite_urs(spec: GroupSpec, F: Iterable[Element]) -> RootedSetDistribution:
    """Uniform rooted translate g^-1 F, g uniform in F; coinciding translates are merged."""
    F = frozenset(spec.canonical(x) for x in F)
    if not F:
        raise ValueError("finite_urs needs a nonempty set")
    counts = Counter(translate(spec, spec.invert(g), F) for g in F)
    atoms = tuple(sorted(((A, c / len(F)) for A, c in counts.items()), key=lambda a: _sort_key(a[0])))
    return RootedSetDistribution(spec, atoms, exact=True)


def point_mass(spec: GroupSpec, A: Iterable[Element]) -> RootedSetDistribution:
    return RootedSetDistribution(spec, ((frozenset(spec.canonical(x) for x in A), 1.0),), exact=True)


def _sort_key(A):
    return (len(A), sorted(map(str, A)))


def mtp_check(dist: RootedSetDistribution, f: Callable[[frozenset, Element], float]) -> float:
    """|E sum_{g in E} f(E, g) - E sum_{g in E} f(g^-1 E, g^-1)|."""
    spec = dist.spec
    out_mass = 0.0
    in_mass = 0.0
    for A, p in dist:
        for g in A:
            gi = spec.invert(g)
            out_mass += p * f(A, g)
            in_mass += p * f(translate(spec, gi, A), gi)
    return abs(out_mass - in_mass)


def mtp_battery(spec: GroupSpec) -> list[tuple[str, Callable]]:
    """Ten test functions f(E, g) used for mass-transport checks."""
    gens = spec.generators
    a, a_inv = gens[0], gens[1]
    b = gens[2] if len(gens) > 2 else spec.multiply(a, a)

    def neighbours_in(E, g):
        return sum(spec.multiply(g, s) in E for s in gens)

    def hashed(E, g):
        key = repr((sorted(map(str, E)), str(g))).encode()
        return int.from_bytes(hashlib.blake2b(key, digest_size=4).digest(), "little") / 2**32

    return [
        ("const", lambda E, g: 1.0),
        ("is_a", lambda E, g: float(g == a)),
        ("is_a_inv", lambda E, g: float(g == a_inv)),
        ("is_b", lambda E, g: float(g == b)),
        ("word_length", lambda E, g: float(spec.length(g))),
        ("inv_size", lambda E, g: 1.0 / len(E)),
        ("size_off_root", lambda E, g: float(len(E)) * (g != spec.identity())),
        ("neighbours_of_target", lambda E, g: float(neighbours_in(E, g))),
        ("near_root_count", lambda E, g: float(spec.length(g) == 1) * sum(spec.length(x) <= 1 for x in E)),
        ("hashed", hashed),
    ]


# ---------------------------------------------------------------------------
# cylinder tables


def _pattern_key(spec: GroupSpec, F) -> tuple:
    return tuple(sorted(spec.format(x) for x in F))


@dataclass(eq=False)
class CylinderTable:
    spec: GroupSpec
    radius: int
    entries: dict  # frozenset pattern -> (p, count or None)
    samples: int | None = None
    status: str = "exact"  # or "empirical"
    acceptance_rate: float | None = None
    meta: dict = field(default_factory=dict)

    def p(self, F) -> float:
        return self.entries[frozenset(self.spec.canonical(x) for x in F)][0]

    def patterns(self):
        return sorted(self.entries, key=_sort_key)

    def monotonicity_violations(self, sigmas: float = 0.0) -> list:
        """Pairs F < F' (F' = F plus one element) with P(F') > P(F) beyond the tolerance.

        For empirical tables the tolerance is ``sigmas`` binomial standard
        errors of the difference."""
        bad = []
        n = self.samples or 0
        for Fp, (pp, _) in self.entries.items():
            for x in Fp:
                if x == self.spec.identity():
                    continue
                F = Fp - {x}
                if F not in self.entries:
                    continue
                p = self.entries[F][0]
                tol = 1e-12
                if self.status == "empirical" and n:
                    tol += sigmas * math.sqrt(max(p * (1 - p), pp * (1 - pp), 1.0 / n) / n)
                if pp > p + tol:
                    bad.append((F, Fp, p, pp))
        return bad

    def to_json(self) -> dict:
        return {
            "group": str(self.spec),
            "radius": self.radius,
            "status": self.status,
            "samples": self.samples,
            "acceptance_rate": self.acceptance_rate,
            **({"meta": self.meta} if self.meta else {}),
            "entries": [
                {"pattern": list(_pattern_key(self.spec, F)), "p": self.entries[F][0], "count": self.entries[F][1]}
                for F in self.patterns()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CylinderTable":
        spec = GroupSpec.parse(data["group"])
        entries = {}
        for row in data["entries"]:
            F = frozenset(spec.parse_element(w) for w in row["pattern"])
            entries[F] = (float(row["p"]), row.get("count"))
        return cls(spec, int(data["radius"]), entries, data.get("samples"), data.get("status", "exact"),
                   data.get("acceptance_rate"), data.get("meta", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


def small_patterns(spec: GroupSpec, r: int, max_size: int = 3) -> list[frozenset]:
    """All F inside ball(r) with identity in F and |F| <= max_size."""
    B = _ball(spec, r)
    if len(B) > MAX_TRACKED_BALL:
        raise MemoryError(f"ball({r}) has {len(B)} vertices; too many patterns to track")
    e = spec.identity()
    rest = B.vertices[1:]
    out = []
    for k in range(max_size):
        for c in itertools.combinations(rest, k):
            out.append(frozenset((e,) + c))
    return out


def exact_table(dist: RootedSetDistribution, r: int) -> CylinderTable:
    """P(F in E) for the small patterns and every atom restricted to ball(r)."""
    spec = dist.spec
    B = _ball(spec, r)
    inside = set(B.vertices)
    restricted = [(frozenset(A & inside), p) for A, p in dist]
    tracked = set(small_patterns(spec, r)) | {A for A, _ in restricted}
    entries = {F: (float(sum(p for A, p in restricted if F <= A)), None) for F in tracked}
    return CylinderTable(spec, r, entries, None, "exact")


def _table_from_masks(spec: GroupSpec, r: int, masks: np.ndarray, counts: np.ndarray, total: int,
                      acceptance_rate: float, meta: dict) -> CylinderTable:
    B = _ball(spec, r)
    tracked = set(small_patterns(spec, r))
    for m in masks:
        tracked.add(frozenset(B.vertices[i] for i in np.flatnonzero(m)))
    entries = {}
    for F in tracked:
        idx = [B.index[x] for x in F]
        c = int(counts[masks[:, idx].all(axis=1)].sum())
        entries[F] = (c / total, c)
    return CylinderTable(spec, r, entries, total, "empirical", acceptance_rate, meta)


class _ChunkResult(NamedTuple):
    masks: dict  # bytes -> count
    accepted: int
    drawn: int


def _sample_chunk(spec: GroupSpec, rule: LocalRule, r: int, seed: int, start: int, stop: int,
                  mode: str) -> _ChunkResult:
    rho = rule.radius
    R = r + rho
    keys = _keys(spec, R, spec.identity())
    nbr = neighborhood_table(spec, R, rho)
    size_r = len(_ball(spec, r))
    seeds = np.array([derive_seed(seed, t) for t in range(start, stop)], dtype=np.uint64)
    u = uniform_labels(seeds, keys)
    if mode == "rejection":
        keep = rule.evaluate(u[:, nbr[0]])
    else:
        # plant a covering seed at the root, then accept with probability 1/N
        m = len(rule.patterns)
        K = np.array(rule.offsets)  # (pattern j, position of phi^-1)
        extra = uniform_labels(seeds, np.array([0, 1], dtype=np.uint64), stream=2)
        c = np.minimum((extra[:, 0] * len(K)).astype(np.int64), len(K) - 1)
        j, pos = K[c, 0], K[c, 1]
        rows = np.arange(len(seeds))
        u[rows, pos] = rule.q * (j + u[rows, pos]) / m
        pid = rule.pattern_ids(u[:, nbr[0]])
        N = np.zeros(len(seeds))
        for jj, pp in rule.offsets:
            N += pid[:, pp] == jj
        keep = extra[:, 1] * N < 1.0
    acc = u[keep]
    mem = rule.evaluate(acc[:, nbr[:size_r]])
    uniq, cnt = np.unique(mem, axis=0, return_counts=True)
    return _ChunkResult({row.tobytes(): int(k) for row, k in zip(uniq, cnt)}, int(keep.sum()), stop - start)


def cylinder_probabilities(spec: GroupSpec, rule: LocalRule, r: int, n_samples: int, seed: int,
                           mode: str = "rejection", threads: int = 1) -> CylinderTable:
    """Empirical P(F in E | root in E) for the small patterns and every observed pattern.

    mode "rejection" keeps the draws with the root in E; mode "planted" (zoo
    rules only) forces a seed whose translate covers the root and accepts
    with probability 1/(number of covering seeds), which samples the
    conditional law exactly at any intensity.
    """
    if mode not in ("rejection", "planted"):
        raise ValueError(f"unknown conditioning mode {mode!r}")
    if mode == "planted" and rule.kind != "poisson_zoo":
        raise ValueError("planted conditioning is only available for poisson_zoo rules")
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    bounds = [(s, min(n_samples, s + CHUNK)) for s in range(0, n_samples, CHUNK)]
    parts = _pool_map(lambda b: _sample_chunk(spec, rule, r, seed, b[0], b[1], mode), bounds, threads)
    merged: Counter = Counter()
    for p in parts:
        merged.update(p.masks)
    accepted = sum(p.accepted for p in parts)
    if accepted == 0:
        raise RuntimeError(f"acceptance starvation: no sample with the root in E among {n_samples} draws")
    size_r = len(_ball(spec, r))
    keys = sorted(merged)
    masks = np.array([np.frombuffer(k, dtype=bool) for k in keys]).reshape(len(keys), size_r)
    counts = np.array([merged[k] for k in keys])
    rate = accepted / n_samples
    meta = {"rule": str(rule), "mode": mode, "draws": n_samples}
    if mode == "planted":
        meta["density"] = rule.q * len(rule.offsets) / len(rule.patterns) * rate
    else:
        meta["density"] = rate
    return _table_from_masks(spec, r, masks, counts, accepted, rate, meta)


def merge_tables(tables: Sequence[CylinderTable]) -> CylinderTable:
    """Count-weighted average of empirical tables over their shared patterns."""
    first = tables[0]
    for t in tables[1:]:
        _check_compatible(first, t)
    if any(t.status != "empirical" for t in tables):
        raise ValueError("only empirical tables can be merged")
    shared = set(first.entries).intersection(*(t.entries for t in tables[1:]))
    total = sum(t.samples for t in tables)
    entries = {}
    for F in shared:
        c = sum(t.entries[F][1] for t in tables)
        entries[F] = (c / total, c)
    drawn = sum(t.samples / t.acceptance_rate for t in tables if t.acceptance_rate)
    return CylinderTable(first.spec, first.radius, entries, total, "empirical", total / drawn if drawn else None)


def _check_compatible(t1: CylinderTable, t2: CylinderTable):
    if t1.spec != t2.spec:
        raise ValueError(f"tables belong to different groups ({t1.spec} vs {t2.spec})")
    if t1.radius != t2.radius:
        raise ValueError(f"tables have different radii ({t1.radius} vs {t2.radius})")


def weak_star_distance(t1: CylinderTable, t2: CylinderTable) -> float:
    """max |P1(F) - P2(F)| over patterns tracked in both tables."""
    _check_compatible(t1, t2)
    shared = set(t1.entries) & set(t2.entries)
    if not shared:
        return 0.0
    return max(abs(t1.entries[F][0] - t2.entries[F][0]) for F in shared)


def mixed_status(t1: CylinderTable, t2: CylinderTable) -> bool:
    """True when one table is exact and the other empirical."""
    return t1.status != t2.status


class ThinningReport(NamedTuple):
    rows: list  # dicts: q, distance, accepted, acceptance_rate, density, covolume_proxy
    inversions: int
    trend_ok: bool
    final_ok: bool


def fiid_thinning_limit_check(spec: GroupSpec, pattern: Sequence[Element], intensities: Sequence[float], r: int,
                              samples: int, seed: int, mode: str = "planted", threshold: float = 0.05,
                              threads: int = 1) -> ThinningReport:
    """Distance between the single-pattern zoo at each intensity and the uniform translate of the pattern."""
    intensities = [float(q) for q in intensities]
    if any(b >= a for a, b in zip(intensities, intensities[1:])):
        raise ValueError("intensities must be strictly decreasing")
    target = exact_table(finite_urs(spec, pattern), r)
    rows = []
    for k, q in enumerate(intensities):
        rule = LocalRule.poisson_zoo(spec, [pattern], q)
        t = cylinder_probabilities(spec, rule, r, samples, derive_seed(seed, k), mode, threads)
        rows.append({
            "q": q,
            "distance": weak_star_distance(t, target),
            "accepted": t.samples,
            "acceptance_rate": t.acceptance_rate,
            "density": t.meta["density"],
            "covolume_proxy": 1.0 / t.meta["density"] if t.meta["density"] > 0 else math.inf,
        })
    d = [row["distance"] for row in rows]
    inversions = sum(b >= a for a, b in zip(d, d[1:]))
    allowed = 1 if len(d) >= 3 else 0
    return ThinningReport(rows, inversions, inversions <= allowed, d[-1] <= threshold)
