"""Factor-of-iid subsets of Cayley balls.

Every vertex of a ball carries an iid uniform label (see ``labels``).  A
local rule of radius r decides membership of x from the labels on the
translate x.ball(r) only, which makes the resulting set E a finite window of
the factor {g : g^-1 x in U}.  Membership is defined on depth <= R - r; all
statistics are taken on the inner window depth <= R - r - 1.
"""
from __future__ import annotations

import math
import re
import warnings
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .groups import CayleyBall, Element, GroupSpec, ball
from .labels import derive_seed, element_keys, uniform_labels

CHUNK = 100_000


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class LocalRule:
    """A finite-radius local rule.

    kind is ``bernoulli`` (params: p), ``poisson_zoo`` (params: q, patterns)
    or ``min_label`` (params: rho).  ``evaluate`` receives, for each target
    vertex x, only the labels at x*b for b in ball(radius), in BFS order.
    """

    kind: str
    radius: int
    p: float = 0.0
    q: float = 0.0
    patterns: tuple = ()
    offsets: tuple = field(default=(), repr=False)  # (pattern index, position of phi^-1 in ball(radius))
    text: str = ""

    @classmethod
    def bernoulli(cls, p: float) -> "LocalRule":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"bernoulli probability {p} outside [0, 1]")
        return cls("bernoulli", 0, p=float(p), text=f"bernoulli:p={p:.9g}")

    @classmethod
    def min_label(cls, spec: GroupSpec, rho: int) -> "LocalRule":
        if rho < 1:
            raise ValueError("min_label window radius must be at least 1")
        return cls("min_label", int(rho), text=f"minlabel:rho={rho}")

    @classmethod
    def poisson_zoo(cls, spec: GroupSpec, patterns: Sequence[Sequence[Element]], q: float,
                    name: str | None = None) -> "LocalRule":
        if not patterns:
            raise ValueError("poisson_zoo needs at least one pattern")
        if not 0.0 < q < 1.0:
            raise ValueError(f"zoo intensity q={q} outside (0, 1)")
        e = spec.identity()
        pats = []
        for P in patterns:
            P = tuple(sorted({spec.canonical(g) for g in P}))
            if e not in P:
                raise ValueError("every zoo pattern must contain the identity")
            pats.append(P)
        r = max(spec.length(g) for P in pats for g in P)
        B = ball(spec, r)
        offsets = tuple((j, B.index[spec.invert(g)]) for j, P in enumerate(pats) for g in P)
        text = f"zoo:q={q:.9g},pat={name}" if name else f"zoo:q={q:.9g},pat=" + "+".join(
            "|".join(spec.format(g) for g in P) for P in pats)
        return cls("poisson_zoo", r, q=float(q), patterns=tuple(pats), offsets=offsets, text=text)

    def with_intensity(self, spec: GroupSpec, q: float) -> "LocalRule":
        """Same rule at another density parameter (q for zoos, p for bernoulli)."""
        if self.kind == "bernoulli":
            return LocalRule.bernoulli(q)
        if self.kind == "poisson_zoo":
            name = self.text.split("pat=", 1)[1]
            return LocalRule.poisson_zoo(spec, self.patterns, q, name=name)
        raise ValueError(f"{self.kind} rules have no intensity parameter")

    def __str__(self):
        return self.text

    # -- evaluation ------------------------------------------------------
    def pattern_ids(self, u: np.ndarray) -> np.ndarray:
        """Zoo seeds: pattern index where u < q, -1 elsewhere."""
        m = len(self.patterns)
        pid = np.minimum(np.floor(u * (m / self.q)), m - 1).astype(np.int64)
        return np.where(u < self.q, pid, -1)

    def evaluate(self, window: np.ndarray) -> np.ndarray:
        """window[..., b] = label at x * ball(radius)[b]; returns membership of x."""
        if self.kind == "bernoulli":
            return window[..., 0] < self.p
        if self.kind == "min_label":
            return window[..., 0] < window[..., 1:].min(axis=-1)
        if self.kind == "poisson_zoo":
            pid = self.pattern_ids(window)
            out = np.zeros(window.shape[:-1], dtype=bool)
            for j, pos in self.offsets:
                out |= pid[..., pos] == j
            return out
        raise ValueError(f"unknown rule kind {self.kind!r}")


def named_pattern(spec: GroupSpec, name: str) -> tuple:
    """ball<k>, blob<k> (first k vertices of BFS order), path<k> (e, a, ..., a^(k-1)),
    or explicit elements separated by '|'."""
    m = re.fullmatch(r"(ball|blob|path)(\d+)", name)
    if m is None:
        return tuple(spec.parse_element(t) for t in name.split("|"))
    kind, k = m.group(1), int(m.group(2))
    if kind == "ball":
        return ball(spec, k).vertices
    if kind == "path":
        if k < 1:
            raise ValueError("path length must be at least 1")
        a = spec.generators[0]
        out = [spec.identity()]
        for _ in range(k - 1):
            out.append(spec.multiply(out[-1], a))
        return tuple(out)
    if k < 1:
        raise ValueError("blob size must be at least 1")
    r = 0
    while spec.ball_size(r) < k:
        r += 1
    return ball(spec, r).vertices[:k]


def parse_rule(text: str, spec: GroupSpec) -> LocalRule:
    """``bernoulli:p=0.3``, ``zoo:q=1e-3,pat=ball1`` (patterns joined by '+'), ``minlabel:rho=1``."""
    try:
        kind, body = text.split(":", 1)
        params = dict(kv.split("=", 1) for kv in body.split(","))
    except ValueError:
        raise ValueError(f"malformed rule {text!r}") from None
    allowed = {"bernoulli": {"p"}, "zoo": {"q", "pat"}, "minlabel": {"rho"}}
    if kind not in allowed:
        raise ValueError(f"unknown rule kind {kind!r} in {text!r}")
    if set(params) != allowed[kind]:
        raise ValueError(f"rule {kind} expects keys {sorted(allowed[kind])}, got {sorted(params)}")
    if kind == "bernoulli":
        return LocalRule.bernoulli(float(params["p"]))
    if kind == "minlabel":
        return LocalRule.min_label(spec, int(params["rho"]))
    pats = [named_pattern(spec, name) for name in params["pat"].split("+")]
    return LocalRule.poisson_zoo(spec, pats, float(params["q"]), name=params["pat"])


# ---------------------------------------------------------------------------
# configurations


@lru_cache(maxsize=32)
def _ball(spec: GroupSpec, R: int) -> CayleyBall:
    return ball(spec, R)


@lru_cache(maxsize=64)
def _keys(spec: GroupSpec, R: int, center: Element) -> np.ndarray:
    B = _ball(spec, R)
    if center == spec.identity():
        return element_keys(B.vertices)
    return element_keys([spec.multiply(center, x) for x in B.vertices])


@lru_cache(maxsize=64)
def neighborhood_table(spec: GroupSpec, R: int, r: int) -> np.ndarray:
    """(T, |ball(r)|) indices of x*b, for x of depth <= R - r and b in ball(r)."""
    B = _ball(spec, R)
    Br = _ball(spec, r)
    targets = B.within(R - r)
    out = np.empty((len(targets), len(Br)), dtype=np.int64)
    for t in targets:
        x = B.vertices[t]
        for m, b in enumerate(Br.vertices):
            out[t, m] = B.index[spec.multiply(x, b)]
    return out


@dataclass(frozen=True, eq=False)
class BallConfig:
    spec: GroupSpec
    rule: LocalRule
    ball: CayleyBall = field(repr=False)
    center: Element
    seed: int
    labels: np.ndarray = field(repr=False)  # uniform labels in [0, 1)
    membership: np.ndarray = field(repr=False)  # only meaningful where `defined`
    defined: np.ndarray = field(repr=False)
    window: np.ndarray = field(repr=False)

    @property
    def R(self) -> int:
        return self.ball.radius

    def member(self, g: Element) -> bool:
        i = self.ball.index[self.spec.canonical(g)]
        if not self.defined[i]:
            raise ValueError(f"membership of {self.spec.format(g)} is undefined at this window")
        return bool(self.membership[i])

    def members_in_window(self) -> np.ndarray:
        return np.flatnonzero(self.membership & self.window)


def sample_config(spec: GroupSpec, rule: LocalRule, R: int, seed: int, center: Element | None = None,
                  overrides: dict | None = None) -> BallConfig:
    """Labels for every vertex of ball(R) (relative to ``center``) and the rule's membership.

    ``overrides`` maps relative elements to forced uniform labels, for fixtures
    and perturbation tests.
    """
    if R <= rule.radius:
        raise ValueError(f"window too small: R={R} must exceed the rule radius {rule.radius}")
    center = spec.identity() if center is None else spec.canonical(center)
    B = _ball(spec, R)
    u = uniform_labels(np.uint64(seed), _keys(spec, R, center))
    if overrides:
        u = u.copy()
        for g, val in overrides.items():
            u[B.index[spec.canonical(g)]] = val
    nbr = neighborhood_table(spec, R, rule.radius)
    mem = np.zeros(len(B), dtype=bool)
    mem[: len(nbr)] = rule.evaluate(u[nbr])
    defined = B.depth <= R - rule.radius
    window = B.depth <= R - rule.radius - 1
    for a in (u, mem, defined, window):
        a.flags.writeable = False
    return BallConfig(spec, rule, B, center, int(seed), u, mem, defined, window)


def poisson_zoo_membership(rule: LocalRule, labels: np.ndarray, nbr: np.ndarray) -> np.ndarray:
    """Union of the translates seed*Phi_j over seeds (label < q) with pattern j, for the targets of nbr."""
    if rule.kind != "poisson_zoo":
        raise ValueError("not a zoo rule")
    return rule.evaluate(np.asarray(labels)[..., nbr])


def density_estimate(spec: GroupSpec, rule: LocalRule, R: int, n_samples: int, seed: int):
    """(p_hat, ci95) for P(root in E); only the labels of ball(rule.radius) are drawn."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if R <= rule.radius:
        raise ValueError(f"window too small: R={R} must exceed the rule radius {rule.radius}")
    keys = _keys(spec, rule.radius, spec.identity())
    hits = 0
    for start in range(0, n_samples, CHUNK):
        seeds = np.array([derive_seed(seed, t) for t in range(start, min(n_samples, start + CHUNK))],
                         dtype=np.uint64)
        hits += int(rule.evaluate(uniform_labels(seeds, keys)).sum())
    p = hits / n_samples
    return p, 1.96 * math.sqrt(p * (1 - p) / n_samples)


# ---------------------------------------------------------------------------
# components and cuts


def _component_labels(B: CayleyBall, keep: np.ndarray):
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return idx, np.zeros(0, dtype=np.int64)
    pos = np.full(len(B), -1)
    pos[idx] = np.arange(idx.size)
    nb = B.adjacency[idx]
    src = np.repeat(np.arange(idx.size), nb.shape[1])
    dst = nb.ravel()
    ok = dst >= 0
    src, dst = src[ok], pos[dst[ok]]
    ok = dst >= 0
    g = coo_matrix((np.ones(ok.sum()), (src[ok], dst[ok])), shape=(idx.size, idx.size))
    _, lab = connected_components(g, directed=False)
    return idx, lab


def components(config: BallConfig) -> list[int]:
    """Sizes of the S-components of E restricted to the inner window, descending."""
    _, lab = _component_labels(config.ball, config.membership & config.window)
    return sorted(np.bincount(lab).tolist(), reverse=True)


class ComponentStats(NamedTuple):
    interior: list  # sizes of components not touching the window's outer shell
    boundary: list  # sizes of components that do (may continue outside)


def component_stats(config: BallConfig) -> ComponentStats:
    B = config.ball
    idx, lab = _component_labels(B, config.membership & config.window)
    if idx.size == 0:
        return ComponentStats([], [])
    sizes = np.bincount(lab)
    shell = B.depth[idx] == B.depth[config.window].max()
    touching = np.zeros(sizes.size, dtype=bool)
    touching[lab[shell]] = True
    return ComponentStats(sorted(sizes[~touching].tolist(), reverse=True),
                          sorted(sizes[touching].tolist(), reverse=True))


@dataclass(frozen=True)
class CutResult:
    cut: np.ndarray  # ball indices of the cut vertices (inside the defined region)
    max_component: int  # k_emp on the window
    cut_fraction: float  # |C & window| / |E & window|, 0 when E & window is empty
    cut_count: int
    member_count: int
    k_target: int
    epsilon_target: float | None
    seed: int

    @property
    def meets_target(self) -> bool | None:
        return None if self.epsilon_target is None else self.cut_fraction <= self.epsilon_target


def cut_random_carving(config: BallConfig, k_target: int, seed: int,
                       epsilon_target: float | None = None) -> CutResult:
    """Carve E into clusters of at most k_target vertices separated by cut vertices.

    Starts are taken in increasing order of fresh carving labels; after each
    cluster the carving continues from the uncut E-neighbours of the vertices
    it just cut, before going back to the label order.  Carving runs on the
    whole defined region so window statistics are not biased by the edge.
    """
    if k_target < 1:
        raise ValueError("k_target must be at least 1")
    B = config.ball
    inE = config.membership & config.defined
    cand = np.flatnonzero(inE)
    lab = uniform_labels(np.uint64(seed), _keys(config.spec, config.R, config.center), stream=1)
    order = cand[np.argsort(lab[cand], kind="stable")]
    adj = B.adjacency
    state = np.zeros(len(B), dtype=np.int8)  # 0 free, 1 clustered, 2 cut
    state[~inE] = -1
    frontier: deque = deque()
    pos = 0
    cut = []
    while True:
        start = -1
        while frontier:
            v = frontier.popleft()
            if state[v] == 0:
                start = v
                break
        if start < 0:
            while pos < len(order) and state[order[pos]] != 0:
                pos += 1
            if pos == len(order):
                break
            start = order[pos]
        cluster = [start]
        seen = {start}
        queue = deque([start])
        boundary = []
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y < 0 or y in seen or state[y] != 0:
                    continue
                seen.add(y)
                if len(cluster) < k_target:
                    cluster.append(y)
                    queue.append(y)
                else:
                    boundary.append(y)
        state[cluster] = 1
        if boundary:
            state[boundary] = 2
            cut.extend(boundary)
            for b in boundary:
                for y in adj[b]:
                    if y >= 0 and state[y] == 0:
                        frontier.append(y)
    cut = np.array(sorted(cut), dtype=np.int64)
    keep = config.membership & config.window
    keep[cut] = False
    _, clab = _component_labels(B, keep)
    kmax = int(np.bincount(clab).max()) if clab.size else 0
    if kmax > k_target:
        raise AssertionError(f"carving left a component of size {kmax} > k_target={k_target}")
    n_e = int((config.membership & config.window).sum())
    n_c = int(config.window[cut].sum()) if cut.size else 0
    return CutResult(cut, kmax, n_c / n_e if n_e else 0.0, n_c, n_e, k_target, epsilon_target, int(seed))


def exponential_selection(weights, epsilon: float, seed: int) -> np.ndarray:
    """Select index P independently with probability 1 - exp(-lambda w(P)), lambda = -4 log eps."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon={epsilon} outside (0, 1/2)")
    w = np.asarray(weights, dtype=float)
    if np.any(~(w > 0)):
        raise ValueError("weights must be positive")
    lam = -4.0 * math.log(epsilon)
    rng = np.random.default_rng(seed)
    return np.flatnonzero(rng.random(w.shape) < -np.expm1(-lam * w))


def selection_probability(w: float, epsilon: float) -> float:
    return -math.expm1(4.0 * math.log(epsilon) * w)


def pairmodel_bound(S_size: int, epsilon: float) -> float:
    """eps' = -11 |S| eps log eps; a warning flags values >= 1, where the bound says nothing."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon={epsilon} outside (0, 1/2)")
    if S_size < 1:
        raise ValueError("generating set must be nonempty")
    val = -11.0 * S_size * epsilon * math.log(epsilon)
    if val >= 1.0:
        warnings.warn(f"vacuous bound: eps'={val:.4g} >= 1", stacklevel=2)
    return val


def is_vacuous(bound: float) -> bool:
    return bound >= 1.0


# ---------------------------------------------------------------------------
# experiments


def _pool_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def cut_trials(spec: GroupSpec, rule: LocalRule, R: int, k_target: int, trials: int, seed: int,
               threads: int = 1) -> list[CutResult]:
    """Independent carving trials; trial t uses seeds derived from (seed, t) only."""

    def one(t):
        cfg = sample_config(spec, rule, R, derive_seed(seed, t))
        return cut_random_carving(cfg, k_target, derive_seed(seed, t, 1))

    return _pool_map(one, range(trials), threads)


def hyperfiniteness_curve(spec: GroupSpec, rule_family: Callable[[float], LocalRule] | LocalRule,
                          densities: Sequence[float], k_target: int, R: int, trials: int, seed: int,
                          threads: int = 1) -> list[dict]:
    """Cut fraction against density parameter.

    Trials reuse the same label seeds at every density, so zoo configurations
    at smaller q are thinnings of those at larger q.  ``mean_cut_fraction``
    averages over trials whose window meets E; ``pooled_cut_fraction`` is
    sum |C & window| / sum |E & window|.
    """
    densities = [float(d) for d in densities]
    if any(b >= a for a, b in zip(densities, densities[1:])):
        raise ValueError("densities must be strictly decreasing")
    if isinstance(rule_family, LocalRule):
        template = rule_family
        rule_family = lambda d: template.with_intensity(spec, d)  # noqa: E731
    rows = []
    for d in densities:
        res = cut_trials(spec, rule_family(d), R, k_target, trials, seed, threads)
        hit = [r for r in res if r.member_count > 0]
        tot_e = sum(r.member_count for r in res)
        rows.append({
            "density": d,
            "mean_cut_fraction": float(np.mean([r.cut_fraction for r in hit])) if hit else 0.0,
            "pooled_cut_fraction": sum(r.cut_count for r in res) / tot_e if tot_e else 0.0,
            "mean_k_emp": float(np.mean([r.max_component for r in res])),
            "nonempty_trials": len(hit),
            "trials": trials,
        })
    return rows
