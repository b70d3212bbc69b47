"""Free groups F_d and free abelian groups Z^d with their standard generators.

Elements are plain tuples in canonical form:

* free(d): a freely reduced word, letters are +k / -k for a_k^{+1} / a_k^{-1}
  (k = 1..d);
* free_abelian(d): an integer vector of length d.

Cayley graphs use right multiplication, g ~ g s, so left translation is a
graph automorphism.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

Element = tuple

MAX_BALL_VERTICES = 2_000_000


@dataclass(frozen=True)
class GroupSpec:
    kind: str  # "free" or "free_abelian"
    d: int

    def __post_init__(self):
        if self.kind not in ("free", "free_abelian"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("rank must be at least 1")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """``free:2`` or ``zd:2``."""
        try:
            kind, d = text.split(":")
            d = int(d)
        except ValueError:
            raise ValueError(f"bad group spec {text!r}; expected free:<d> or zd:<d>") from None
        kinds = {"free": "free", "zd": "free_abelian", "free_abelian": "free_abelian"}
        if kind not in kinds:
            raise ValueError(f"bad group spec {text!r}; expected free:<d> or zd:<d>")
        return cls(kinds[kind], d)

    def __str__(self):
        return f"{'free' if self.kind == 'free' else 'zd'}:{self.d}"

    # -- group law -------------------------------------------------------
    def identity(self) -> Element:
        return () if self.kind == "free" else (0,) * self.d

    @property
    def generators(self) -> list[Element]:
        """Symmetric generating set in the order a1, a1^-1, a2, a2^-1, ..."""
        gens = []
        for k in range(1, self.d + 1):
            if self.kind == "free":
                gens += [(k,), (-k,)]
            else:
                e = [0] * self.d
                e[k - 1] = 1
                gens.append(tuple(e))
                e[k - 1] = -1
                gens.append(tuple(e))
        return gens

    def canonical(self, g: Sequence[int]) -> Element:
        if self.kind == "free_abelian":
            if len(g) != self.d:
                raise ValueError(f"vector {g!r} has wrong length for Z^{self.d}")
            return tuple(int(x) for x in g)
        out: list[int] = []
        for a in g:
            a = int(a)
            if a == 0 or abs(a) > self.d:
                raise ValueError(f"letter {a} not in free group of rank {self.d}")
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
        return tuple(out)

    def multiply(self, g: Element, h: Element) -> Element:
        if self.kind == "free_abelian":
            return tuple(x + y for x, y in zip(self.canonical(g), self.canonical(h)))
        g = list(self.canonical(g))
        for a in self.canonical(h):
            if g and g[-1] == -a:
                g.pop()
            else:
                g.append(a)
        return tuple(g)

    def invert(self, g: Element) -> Element:
        g = self.canonical(g)
        if self.kind == "free_abelian":
            return tuple(-x for x in g)
        return tuple(-a for a in reversed(g))

    def length(self, g: Element) -> int:
        g = self.canonical(g)
        return len(g) if self.kind == "free" else sum(abs(x) for x in g)

    def ball_size(self, R: int) -> int:
        """Closed-form |ball(R)| for the standard generators."""
        if self.kind == "free":
            if self.d == 1:
                return 2 * R + 1
            q = 2 * self.d - 1
            return 1 + 2 * self.d * (q**R - 1) // (q - 1)
        # lattice points with l1 norm <= R in Z^d
        from math import comb

        return sum(2**k * comb(self.d, k) * comb(R, k) for k in range(min(self.d, R) + 1))

    def format(self, g: Element) -> str:
        g = self.canonical(g)
        if self.kind == "free_abelian":
            return "(" + ",".join(map(str, g)) + ")"
        if not g:
            return "e"
        names = "abcdefghijklmnopqrstuvwxyz"
        return "".join(names[abs(a) - 1] + ("" if a > 0 else "'") for a in g)

    def parse_element(self, text: str) -> Element:
        text = text.strip()
        if self.kind == "free_abelian":
            return self.canonical([int(x) for x in text.strip("()").split(",")])
        if text == "e":
            return ()
        names = "abcdefghijklmnopqrstuvwxyz"
        word = []
        for ch in text:
            if ch == "'":
                word[-1] = -word[-1]
            else:
                word.append(names.index(ch) + 1)
        return self.canonical(word)


@dataclass(frozen=True, eq=False)
class CayleyBall:
    spec: GroupSpec
    radius: int
    vertices: tuple  # canonical forms, BFS order, identity first
    adjacency: np.ndarray = field(repr=False)  # (V, |S|) neighbor index or -1
    depth: np.ndarray = field(repr=False)  # word length of each vertex
    index: dict = field(repr=False)

    def __len__(self):
        return len(self.vertices)

    def within(self, r: int) -> np.ndarray:
        """Indices of the vertices of word length <= r (a prefix of the BFS order)."""
        return np.flatnonzero(self.depth <= r)

    def translate_index(self, g: Element, elems: Sequence[Element]) -> np.ndarray:
        """Index of g*x for each x, or -1 when outside the ball."""
        return np.array([self.index.get(self.spec.multiply(g, x), -1) for x in elems], dtype=np.int64)

    def edges_csv(self) -> str:
        lines = ["u,v,generator"]
        gens = self.spec.generators
        for u, row in enumerate(self.adjacency):
            for s, v in enumerate(row):
                if v > u:
                    lines.append(f"{self.spec.format(self.vertices[u])},{self.spec.format(self.vertices[v])},"
                                 f"{self.spec.format(gens[s])}")
        return "\n".join(lines) + "\n"


def ball(spec: GroupSpec, R: int) -> CayleyBall:
    """All elements of word length <= R in BFS order with generator order a1, a1^-1, a2, ..."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    size = spec.ball_size(R)
    if size > MAX_BALL_VERTICES:
        raise MemoryError(f"ball of radius {R} in {spec} has {size} vertices (budget {MAX_BALL_VERTICES})")
    gens = spec.generators
    e = spec.identity()
    verts = [e]
    depth = [0]
    index = {e: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        if depth[u] == R:
            continue
        g = verts[u]
        for s in gens:
            x = spec.multiply(g, s)
            if x not in index:
                index[x] = len(verts)
                verts.append(x)
                depth.append(depth[u] + 1)
                queue.append(index[x])
    adj = np.full((len(verts), len(gens)), -1, dtype=np.int64)
    for u, g in enumerate(verts):
        for k, s in enumerate(gens):
            adj[u, k] = index.get(spec.multiply(g, s), -1)
    return CayleyBall(spec, R, tuple(verts), adj, np.asarray(depth), index)


def multiply(spec: GroupSpec, g: Element, h: Element) -> Element:
    return spec.multiply(g, h)


def invert(spec: GroupSpec, g: Element) -> Element:
    return spec.invert(g)
