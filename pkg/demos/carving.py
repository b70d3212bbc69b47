# Cut a factor-of-iid set into pieces of size <= k and watch the cut fraction fall with density.
import math
from esmlab.groups import GroupSpec
from esmlab.fiid import LocalRule, sample_config, cut_random_carving, hyperfiniteness_curve
from esmlab import fiid

# full line: cut one vertex in every k+1
Z = GroupSpec("free_abelian", 1)
line = sample_config(Z, LocalRule.bernoulli(1.0), 400, seed=0)
for k in (1, 4, 20):
    r = cut_random_carving(line, k, seed=1)
    print(k, r.cut_fraction, 1 / (k + 1), r.max_component)

F2 = GroupSpec("free", 2)
rows = hyperfiniteness_curve(F2, LocalRule.bernoulli(0.5), [0.5, 0.4, 0.3, 0.2], 10, 6, 10, seed=0)
for r in rows:
    print(r)

# the randomized selection step and its error bound
print(fiid.selection_probability(1.0, math.exp(-1)))
print(len(fiid.exponential_selection([0.1] * 1000, 0.2, seed=0)))
print(fiid.pairmodel_bound(4, 1e-6))
