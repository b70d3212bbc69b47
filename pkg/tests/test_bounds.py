import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esmlab import bounds
from esmlab.bounds import HypothesisError
from esmlab.cube import CubeSubset, LinearOrder, binary_entropy
from esmlab import esm
import oracles

HALF = CubeSubset.cylinder(2, 0, 1)
SINGLE = CubeSubset.from_points(2, [(1, 1)])
NAT2 = LinearOrder.natural(2)
K = bounds.DEFAULT_KAPPAS


def as_set(U):
    return {tuple((int(p) >> i) & 1 for i in range(U.n)) for p in U.points()}


@st.composite
def pair(draw, nmax=5):
    n = draw(st.integers(1, nmax))
    u = np.array(draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n)))
    keep = np.array(draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n)))
    seq = draw(st.permutations(range(n)))
    return CubeSubset(n, u), CubeSubset(n, u & keep), LinearOrder.from_sequence(seq)


def test_joint_delta_examples():
    w = 3
    brute = oracles.joint_delta(as_set(HALF), as_set(SINGLE), 2, [0, 1], (1, 1), 0)
    assert bounds.joint_delta(HALF, SINGLE, NAT2, w, 0) == pytest.approx(brute, abs=1e-12)
    for V in (HALF, CubeSubset.empty(2)):
        for w, i in itertools.product(range(4), range(2)):
            assert bounds.joint_delta(HALF, V, NAT2, w, i) == pytest.approx(esm.delta(HALF, NAT2, w, i), abs=1e-12)
    with pytest.raises(ValueError):
        bounds.joint_delta(SINGLE, HALF, NAT2, 0, 0)


@settings(max_examples=40, deadline=None)
@given(pair(4))
def test_joint_delta_bruteforce_and_data_processing(arg):
    U, V, o = arg
    seq = list(o.sequence)
    for w, i in itertools.product(range(1 << U.n), range(U.n)):
        wt = tuple((w >> k) & 1 for k in range(U.n))
        jd = bounds.joint_delta(U, V, o, w, i)
        assert jd == pytest.approx(oracles.joint_delta(as_set(U), as_set(V), U.n, seq, wt, i), abs=1e-12)
        assert jd >= esm.delta(U, o, w, i) - 1e-9


def test_s_terms_examples():
    t = bounds.s_terms(HALF, HALF, NAT2, 3, 0, *K)
    assert t.s1 == pytest.approx(0, abs=1e-15) and t.r == 0 and t.region == 2  # eps_U = 1/2 > kappa0
    with pytest.raises(HypothesisError):
        bounds.s_terms(HALF, SINGLE, NAT2, 3, 0, 0.3, 0.1, 0.01)
    with pytest.raises(HypothesisError):
        bounds.s_terms(HALF, SINGLE, NAT2, 3, 0, 0.2, 0.125, 0.1)


def test_region_two_when_dense_slice():
    rng = np.random.default_rng(3)
    seen = 0
    for _ in range(50):
        U = CubeSubset(5, rng.random(32) < 0.5)
        V = CubeSubset(5, U.membership & (rng.random(32) < 0.5))
        o = esm.sample_uniform_order(5, rng)
        for w, i in itertools.product(range(32), range(5)):
            t = bounds.s_terms(U, V, o, w, i, *K)
            eps = esm.conditional_densities(U, o, w, i).eps
            if eps > K[0] and t.r > 0:
                assert t.region == 2
                seen += 1
    assert seen > 0


@settings(max_examples=30, deadline=None)
@given(pair(6))
def test_s1_closed_form_and_sign(arg):
    U, V, o = arg
    for w, i in itertools.product(range(1 << U.n), range(U.n)):
        t = bounds.s_terms(U, V, o, w, i, *K)
        assert t.s1 >= -1e-9
        assert t.s1 == pytest.approx(t.s1_closed, abs=1e-9)
        dU = esm.delta(U, o, w, i)
        assert t.s1 == pytest.approx(bounds.joint_delta(U, V, o, w, i) - dU, abs=1e-12)
        x = esm.delta(V, o, w, i) - (esm.conditional_densities(V, o, w, i).eps /
                                     max(esm.conditional_densities(U, o, w, i).eps, 1e-300)) * dU
        assert t.s2 + t.s3 == pytest.approx(x if esm.conditional_densities(U, o, w, i).eps > 0 else
                                            esm.delta(V, o, w, i), abs=1e-9)
        assert t.r == pytest.approx(max(0.0, t.s2 + t.s3), abs=1e-12)


def test_check_hquad():
    assert bounds.check_hquad(0.5) == (True, True)
    gap = math.log(2) - oracles.mp_h(0.25)
    assert 0.125 <= gap <= 0.5 and gap == pytest.approx(0.1308, abs=1e-4)
    assert bounds.check_hquad(0.25) == (True, True)
    for k in range(1, 100):
        assert bounds.check_hquad(k / 100) == (True, True)
    with pytest.raises(ValueError):
        bounds.check_hquad(0.0)


def test_pointwise_checkers_statuses():
    # equal conditional ratios make the s1 lower bound trivial
    U = CubeSubset.full(3)
    V = CubeSubset.cylinder(3, 2)
    o = LinearOrder.natural(3)
    c = bounds.check_s1_lower(U, V, o, 0, 0, 0.1)
    assert c.status == "ok" and c.lhs == 0
    # hypothesis not met: eps_U > 1/4
    assert bounds.check_delta_approx(U, o, 0, 0).status == "skipped"
    assert bounds.check_s3(U, V, o, 0, 0).status == "skipped"
    s = bounds.check_s2(U, U, o, 0, 0, 0.125, 0.015625)
    assert s and s.lhs == 0
    with pytest.raises(HypothesisError):
        bounds.check_s2(U, V, o, 0, 0, 0.3, 0.01)


def test_delta_approx_singleton_exhaustive():
    for p in range(16):
        U = CubeSubset.from_points(4, [p])
        for seq in itertools.permutations(range(4)):
            o = LinearOrder.from_sequence(seq)
            for w, i in itertools.product(range(16), range(4)):
                assert bounds.check_delta_approx(U, o, w, i)


def test_delta_approx_symmetric_slice():
    # eps0 = eps1 everywhere: U is a union of fibres in coordinate 0 direction... use a cylinder in the last
    U = CubeSubset.from_points(4, [0b0000, 0b0001])
    o = LinearOrder.from_sequence([3, 2, 1, 0])
    for w in range(16):
        c = bounds.check_delta_approx(U, o, w, 0)
        assert c


def test_delta_approx_tightens():
    ratios = []
    for n in (6, 8, 10, 12):
        U = CubeSubset.from_points(n, [0, 3])
        d = esm.slice_densities(U.membership, LinearOrder.natural(n))
        D = esm.delta_from_densities(*d)
        app, lo, hi = bounds._delta_approx(d.eps, d.eps0, D)
        assert np.all(lo[1][app] >= -1e-12)
        ratios.append(float(np.max((hi[0] - hi[1])[app])))
    assert ratios == sorted(ratios) or all(r <= 1e-9 for r in ratios)


def test_region_integrals_examples():
    rng = np.random.default_rng(7)
    U = CubeSubset(10, rng.random(1024) < 0.05)
    o = esm.sample_uniform_order(10, rng)
    ri = bounds.region_integrals(U, U, o, K)
    assert ri.integrals == (0.0,) * 5 and ri.union_excess == 0
    with pytest.raises(HypothesisError):
        bounds.region_integrals(U, U, o)  # asymptotic thresholds are not admissible here
    with pytest.raises(HypothesisError):
        bounds.region_integrals(CubeSubset.full(10), U, o, K)


def test_region_integrals_singleton_family():
    n = 16
    rng = np.random.default_rng(11)
    pts = rng.choice(1 << n, size=40, replace=False)
    U = CubeSubset.from_points(n, pts.tolist())
    V = CubeSubset.from_points(n, pts[:20].tolist())
    o = esm.sample_uniform_order(n, rng)
    ri = bounds.region_integrals(U, V, o, K)
    assert ri.integrals[0] == 0.0
    assert ri.total == pytest.approx(ri.union_excess, abs=1e-9)
    assert ri.total == pytest.approx(esm.union_excess(U, V, o), abs=1e-9)
    assert ri.violations() == []


def test_region_bounds_formula():
    mu = 0.01
    b = bounds.region_bounds(mu, 0.2, 0.125, 0.015625)
    H = binary_entropy(mu)
    assert b[1] == pytest.approx(-4 * mu * math.log(0.2))
    assert b[3] == pytest.approx(0.125 * H + mu)
    assert b[4] == pytest.approx((32 * 0.2 + 4 * binary_entropy(0.25)) * H
                                 - 16 / math.sqrt(0.125) * math.log(0.015625) * math.sqrt(H * mu))


def test_asymptotic_kappas_need_tiny_measure():
    with pytest.raises(HypothesisError):
        bounds.validate_kappas(*bounds.asymptotic_kappas(2.0**-24))
    bounds.validate_kappas(*bounds.asymptotic_kappas(math.exp(-600)))


def test_exhaustive_sweep_n3_all_orders():
    orders = [LinearOrder.from_sequence(p) for p in itertools.permutations(range(3))]
    rep = bounds.exhaustive_sweep(3, 8, orders=orders)
    assert rep.total_violations == 0
    assert rep.pairs == 3 ** 8 * 6
    for name, t in rep.tallies.items():
        assert t.checked > 0, name


def test_sweep_orders_equivariant():
    # natural order alone covers every record: all 24 orders give 24x the tallies
    pairs = list(bounds.exhaustive_pairs(4, 2))
    orders = [LinearOrder.from_sequence(p) for p in itertools.permutations(range(4))]
    nat = bounds.SweepReport()
    allr = bounds.SweepReport()
    for Ut, Vt in pairs:
        nat.merge(bounds.check_batch(Ut, Vt, LinearOrder.natural(4)))
        for o in orders:
            allr.merge(bounds.check_batch(Ut, Vt, o))
    for k in bounds.CHECKS:
        a, b = nat.tallies[k], allr.tallies[k]
        assert b.checked == 24 * a.checked and b.skipped == 24 * a.skipped and b.violated == 24 * a.violated
        if a.checked:
            assert b.max_slack == pytest.approx(a.max_slack, abs=1e-12)


def test_s1_integral_identity_random():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = 8
        U = rng.random(1 << n) < rng.uniform(0.01, 0.5)
        V = U & (rng.random(1 << n) < rng.uniform(0, 1))
        rep = bounds.check_batch(U[None], V[None], esm.sample_uniform_order(n, rng))
        assert rep.tallies["s1_integral"].violated == 0


def test_rate_experiment_schema_and_determinism():
    a = bounds.excess_rate_experiment(10, [2.0**-3, 2.0**-6], 5, 1)
    b = bounds.excess_rate_experiment(10, [2.0**-3, 2.0**-6], 5, 1)
    assert a.rows == b.rows and a.C == b.C
    assert set(a.rows[0]) == {"mu", "excess_mean", "excess_sd", "bound"}
    assert math.isfinite(a.C) and a.C > 0
    with pytest.raises(ValueError):
        bounds.excess_rate_experiment(4, [2.0**-8], 2, 0)


def test_proj_distance_examples():
    assert bounds.proj_distance([1, 2, 3], [1, 2, 3]) == 0
    assert bounds.proj_distance([1, 0], [0, 1]) == pytest.approx(1.0)
    assert bounds.proj_distance([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert bounds.proj_distance([2, 4], [1, 2]) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        bounds.proj_distance([0, 0], [1, 2])


def test_proj_sandwich_examples():
    r = bounds.check_proj_sandwich([1, 2, 3], [2, 4, 6])
    assert r.ok and r.distance == pytest.approx(0, abs=1e-15) and r.sup_ratio == pytest.approx(0, abs=1e-12)
    u = np.array([1.0, 2.0, 3.0, 4.0])
    v = u.copy()
    v[2] = 7.0
    r = bounds.check_proj_sandwich(u, v)
    assert r.ok
    pair_max = max(bounds.proj_distance(u[[i, j]], v[[i, j]]) for i, j in itertools.combinations(range(4), 2))
    assert r.pairwise_max == pair_max
    assert any(r.pairwise_max == bounds.proj_distance(u[[i, 2]], v[[i, 2]]) for i in (0, 1, 3))


def test_min_sup_ratio_against_grid():
    rng = np.random.default_rng(0)
    for _ in range(20):
        u, v = rng.uniform(0.1, 2, 4), rng.uniform(0.1, 2, 4)
        best, lam = bounds.min_sup_ratio(u, v)
        grid = np.linspace(lam - 1, lam + 1, 20001)
        vals = np.max(np.abs(u[None] - grid[:, None] * v[None]), axis=1) / np.max(np.abs(u))
        assert best <= vals.min() + 1e-12


def test_proj_sweep_dim5():
    out = bounds.proj_sweep(10_000, [5], seed=3)
    assert out["metric_violations"] == out["lower_violations"] == out["upper_violations"] == 0
