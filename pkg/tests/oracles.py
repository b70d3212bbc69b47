"""Slow reference implementations used as test oracles.

Everything here works on python sets of coordinate tuples and enumerates
slices directly with itertools, sharing no code with the package.
"""
import itertools
import math

import mpmath

mpmath.mp.dps = 40


def mp_h(t):
    t = mpmath.mpf(t)
    out = mpmath.mpf(0)
    for p in (t, 1 - t):
        if p > 0:
            out -= p * mpmath.log(p)
    return float(out)


def fh(t):
    out = 0.0
    for p in (t, 1 - t):
        if p > 0:
            out -= p * math.log(p)
    return out


def points(n):
    return list(itertools.product((0, 1), repeat=n))


def to_int(w):
    return sum(b << i for i, b in enumerate(w))


def slice_of(n, seq, w, i):
    """Cube points agreeing with w on every coordinate revealed before i."""
    before = seq[: seq.index(i)]
    return [p for p in points(n) if all(p[j] == w[j] for j in before)]


def densities(U, n, seq, w, i):
    S = slice_of(n, seq, w, i)
    eps = sum(p in U for p in S) / len(S)
    half0 = [p for p in S if p[i] == 0]
    half1 = [p for p in S if p[i] == 1]
    eps0 = 0.5 * sum(p in U for p in half0) / len(half0)
    eps1 = 0.5 * sum(p in U for p in half1) / len(half1)
    return eps, eps0, eps1


def delta(U, n, seq, w, i):
    e, e0, e1 = densities(U, n, seq, w, i)
    return fh(e) - 0.5 * fh(2 * e0) - 0.5 * fh(2 * e1)


def heights(U, n, seq):
    J = {}
    for w in points(n):
        for i in range(n):
            if w in U:
                e = densities(U, n, seq, w, i)[0]
                J[w, i] = delta(U, n, seq, w, i) / e
            else:
                J[w, i] = 0.0
    return J


def mass(J, n):
    return sum(J.values()) / 2**n


def entropy3(probs):
    return -sum(p * math.log(p) for p in probs if p > 0)


def joint_delta(U, V, n, seq, w, i):
    """Entropy drop of (in V, in U minus V, outside U) on the slice."""
    S = slice_of(n, seq, w, i)

    def dist(pts):
        a = sum(p in V for p in pts) / len(pts)
        b = sum(p in U and p not in V for p in pts) / len(pts)
        return (a, b, 1 - a - b)

    before = entropy3(dist(S))
    after = 0.5 * entropy3(dist([p for p in S if p[i] == 0])) + 0.5 * entropy3(dist([p for p in S if p[i] == 1]))
    return before - after
