# Pointwise inequalities behind approximate additivity, checked on many pairs.
import numpy as np
from esmlab import bounds
from esmlab.cube import CubeSubset

# every pair V <= U in {0,1}^3
rep = bounds.exhaustive_sweep(3, 8)
for name, t in rep.tallies.items():
    print("%-16s checked %8d  skipped %8d  violated %d" % (name, t.checked, t.skipped, t.violated))

# region integrals for one sparse pair; thresholds must satisfy the ordering constraints
rng = np.random.default_rng(0)
U = CubeSubset(12, rng.random(4096) < 0.01)
V = CubeSubset(12, U.membership & (rng.random(4096) < 0.5))
ri = bounds.region_integrals(U, V, bounds.esm.sample_uniform_order(12, rng), bounds.DEFAULT_KAPPAS)
print(ri.integrals, ri.bounds, ri.union_excess)

# with the asymptotic thresholds the hypotheses fail at this size
try:
    bounds.region_integrals(U, V, bounds.esm.sample_uniform_order(12, rng))
except bounds.HypothesisError as exc:
    print("skipped:", exc)
