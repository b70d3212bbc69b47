# Support-map heights on a small cube, and the mass identity.
import numpy as np
from esmlab.cube import CubeSubset, LinearOrder, binary_entropy
from esmlab import esm

# half cube: every slice before coordinate 0 is revealed has density 1/2
U = CubeSubset.cylinder(3, 0, 1)
f = esm.esm_field(U, LinearOrder.natural(3))
print(f.heights)            # 2 log 2 on U along coordinate 0, zero elsewhere
print(esm.field_mass(f), binary_entropy(0.5))

# a random set, a few orders: mass stays h(mu(U)) whatever the order
rng = np.random.default_rng(1)
V = CubeSubset(8, rng.random(256) < 0.1)
for _ in range(3):
    o = esm.sample_uniform_order(8, rng)
    print(o.sequence, esm.field_mass(esm.esm_field(V, o)), binary_entropy(V.membership.mean()))

# disjoint sets have disjoint supports
W = CubeSubset(8, ~V.membership & (rng.random(256) < 0.1))
o = LinearOrder.natural(8)
print(esm.pair_masses(esm.esm_field(V, o), esm.esm_field(W, o)))

# first few rows of the CSV export
print("\n".join(esm.esm_field(CubeSubset.from_points(2, [3]), LinearOrder.natural(2)).to_csv().splitlines()[:6]))
