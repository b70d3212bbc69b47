"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
collected in the "acceptance criteria" section at the end of the output.
"""
import itertools
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from esmlab import bounds, esm, fiid, unimodular
from esmlab.cube import CubeSubset, LinearOrder, h
from esmlab.fiid import LocalRule, named_pattern
from esmlab.groups import GroupSpec, ball

SEED = 0
F2 = GroupSpec("free", 2)


def verdict(k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_mass_identity():
    t0 = time.perf_counter()
    n = 4
    tables = ((np.arange(1 << 16)[:, None] >> np.arange(16)) & 1).astype(bool)
    H = h(tables.mean(axis=1))
    worst = 0.0
    for seq in itertools.permutations(range(n)):
        m = esm.batch_field_masses(tables, LinearOrder.from_sequence(seq))
        worst = max(worst, float(np.abs(m - H).max()))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and dt <= 60,
            f"65536 subsets x 24 orders, max |mass - h(mu)| = {worst:.2e}, {dt:.1f} s")


def test_criterion_02_disjointness():
    rng = np.random.default_rng(SEED)
    n = 10
    worst = 0.0
    for _ in range(1000):
        part = rng.integers(0, 3, size=1 << n)
        o = esm.sample_uniform_order(n, rng)
        fU = esm.esm_field(CubeSubset(n, part == 1), o)
        fV = esm.esm_field(CubeSubset(n, part == 2), o)
        worst = max(worst, esm.pair_masses(fU, fV).intersection)
    verdict(2, worst == 0.0, f"1000 disjoint pairs at n=10, max intersection mass = {worst!r}")


def test_criterion_03_equivariance():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        U = CubeSubset(n, rng.random(1 << n) < rng.random())
        o = esm.sample_uniform_order(n, rng)
        worst = max(worst, esm.check_equivariance(U, o, rng.permutation(n).tolist()))
    verdict(3, worst <= 1e-9, f"1000 (U, sigma, order) triples at n<=8, max deviation = {worst:.2e}")


def test_criterion_04_excess_rate():
    t0 = time.perf_counter()
    dens = [2.0**-k for k in range(4, 13)]
    tab = bounds.excess_rate_experiment(16, dens, 100, SEED)
    dt = time.perf_counter() - t0
    y = [r["excess_mean"] for r in tab.rows]
    dec = all(b < a for a, b in zip(y, y[1:]))
    ok = dec and y[-1] <= 0.5 and dt <= 600 and math.isfinite(tab.C)
    verdict(4, ok, "mean relative excess " + ", ".join(f"{v:.4f}" for v in y)
            + f"; fitted C = {tab.C:.4f}; {dt:.0f} s")


@pytest.fixture(scope="module")
def sweeps():
    t0 = time.perf_counter()
    ex = bounds.exhaustive_sweep(4, 8)
    t1 = time.perf_counter()
    rnd = bounds.random_sweep(12, 10_000, SEED)
    return ex, rnd, t1 - t0, time.perf_counter() - t1


INEQUALITIES = {
    "delta_alternate": "DeltaU",
    "hquad": "hquad",
    "s1_lower": "s1 lower",
    "delta_approx": "DeltaU approx",
    "s3": "s3",
    "s2": "s2",
    "regions": "I1-I5",
}


def test_criterion_05_inequality_suite(sweeps):
    ex, rnd, t_ex, t_rnd = sweeps
    total = bounds.SweepReport()
    total.merge(ex)
    total.merge(rnd)
    parts = []
    ok = ex.total_violations == 0 and rnd.total_violations == 0
    for key, label in INEQUALITIES.items():
        t = total.tallies[key]
        ok &= t.checked > 0
        skip = t.skipped / (t.checked + t.skipped)
        parts.append(f"{label} {t.checked} checked/{t.violated} violated/{100 * skip:.0f}% skipped")
    verdict(5, ok, f"{ex.pairs} exhaustive pairs ({t_ex:.0f} s) + {rnd.pairs} random triples ({t_rnd:.0f} s); "
            + "; ".join(parts))


def test_criterion_06_s1_integral(sweeps):
    ex = sweeps[0]
    t = ex.tallies["s1_integral"]
    # the tally holds |integral - mu_U h(mu_V/mu_U)| and integral - mu_U for every pair
    ok = t.violated == 0 and t.checked == 2 * ex.pairs
    verdict(6, ok, f"{ex.pairs} pairs at n=4, identity violations = {t.violated}, max slack {t.max_slack:.2e}")


def test_criterion_07_projective_sandwich():
    out = bounds.proj_sweep(10_000, range(2, 9), seed=SEED)
    bad = out["metric_violations"] + out["lower_violations"] + out["upper_violations"]
    verdict(7, bad == 0, f"{out['checked']} pairs in dims 2-8, violations = {bad}, "
            f"max lower ratio {out['max_lower_ratio']:.3f}, max upper ratio {out['max_upper_ratio']:.3f}")


def test_criterion_08_unimodularity():
    verts = ball(F2, 2).vertices
    battery = unimodular.mtp_battery(F2)
    worst, count = 0.0, 0
    for k in range(1, 5):
        for F in itertools.combinations(verts, k):
            d = unimodular.finite_urs(F2, F)
            worst = max(worst, max(unimodular.mtp_check(d, f) for _, f in battery))
            count += 1
    verdict(8, worst <= 1e-12, f"{count} sets x {len(battery)} functions, worst violation = {worst:.2e}")


def test_criterion_09_hyperfiniteness_trend():
    pat = named_pattern(F2, "blob50")
    rule = LocalRule.poisson_zoo(F2, [pat], 1e-2, name="blob50")
    rows = fiid.hyperfiniteness_curve(F2, rule, [1e-2, 1e-3, 1e-4], 50, 8, 50, SEED)
    y = [r["mean_cut_fraction"] for r in rows]
    zoo_ok = all(b < a for a, b in zip(y, y[1:]))
    Z1 = GroupSpec("free_abelian", 1)
    line = fiid.sample_config(Z1, LocalRule.bernoulli(1.0), 600, SEED)
    r = fiid.cut_random_carving(line, 50, SEED)
    z_ok = abs(r.cut_fraction * 51 - 1) <= 0.05 and int(line.window.sum()) >= 1000
    detail = ("free(2) blob50 zoo, mean cut fraction at q=1e-2,1e-3,1e-4: "
              + ", ".join(f"{v:.5f}" for v in y)
              + " (trials meeting E: " + ",".join(str(rr["nonempty_trials"]) for rr in rows)
              + f"); Z line window {int(line.window.sum())}: {r.cut_fraction:.5f} vs 1/51 = {1 / 51:.5f}")
    verdict(9, zoo_ok and z_ok, detail)


def test_criterion_10_thinning_limit():
    rep = unimodular.fiid_thinning_limit_check(F2, named_pattern(F2, "ball1"), [1e-2, 1e-3, 1e-4], 2,
                                               10**6, SEED, mode="planted")
    d = [r["distance"] for r in rep.rows]
    verdict(10, rep.trend_ok and rep.final_ok,
            "distances " + ", ".join(f"{v:.5f}" for v in d) + f", inversions {rep.inversions}")


CLI_RUNS = [
    ["esm", "verify", "--n", "4", "--exhaustive"],
    ["esm", "dump", "--subset", "n=3;bits=96", "--order", "2,0,1"],
    ["esm", "excess", "--subset", "n=3;bits=f0", "--subset-v", "n=3;bits=30"],
    ["bounds", "sweep", "--n", "3"],
    ["bounds", "sweep", "--random", "--n", "8", "--count", "200"],
    ["bounds", "rate", "--n", "12", "--trials", "10", "--densities", "2^-3,2^-6,2^-9"],
    ["bounds", "proj", "--count", "2000"],
    ["fiid", "density", "--rule", "zoo:q=1e-3,pat=ball1", "--trials", "10000", "--seed", "7"],
    ["fiid", "cut", "--rule", "bernoulli:p=0.4", "--R", "6", "--k", "20", "--trials", "20"],
    ["fiid", "curve", "--rule", "zoo:q=1e-2,pat=blob50", "--trials", "10"],
    ["urs", "cylinders", "--rule", "zoo:q=1e-2,pat=ball1", "--samples", "1e5", "--seed", "3"],
    ["urs", "mtp", "--radius", "1"],
    ["urs", "limit", "--samples", "1e5"],
]


def _cli(argv, threads, hashseed, out):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    env.pop("ESMLAB_THREADS", None)
    r = subprocess.run([sys.executable, "-m", "esmlab.cli", *argv, "--threads", str(threads), "--out", str(out)],
                       env=env, capture_output=True, text=True)
    return r.returncode, out.read_bytes() if out.exists() else b""


def test_criterion_11_determinism(tmp_path):
    bad = []
    tables = []
    for j, argv in enumerate(CLI_RUNS + [None]):
        if argv is None:  # distance between two tables written by the runs above
            argv = ["urs", "distance", "--a", str(tables[0]), "--b", str(tables[1])]
        outs = []
        for rep, (threads, hs) in enumerate([(1, 1), (1, 2), (8, 3)]):
            outs.append(_cli(argv, threads, hs, tmp_path / f"{j}_{rep}.out"))
        if argv[:2] == ["urs", "cylinders"]:
            tables = [tmp_path / f"{j}_0.out", tmp_path / f"{j}_2.out"]
        if len(set(outs)) != 1 or outs[0][0] != 0 or not outs[0][1]:
            bad.append(" ".join(argv[:2]))
    verdict(11, not bad, f"{len(CLI_RUNS) + 1} invocations x 3 runs (threads 1,1,8; different hash seeds), "
            f"mismatches: {bad or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
