# Finite unimodular random subsets, mass transport, and cylinder fingerprints.
from esmlab.groups import GroupSpec
from esmlab import unimodular as um
from esmlab.fiid import LocalRule, named_pattern

F1 = GroupSpec("free", 1)
d = um.finite_urs(F1, [(), (1,), (1, 1)])
for A, p in d:
    print(sorted(F1.format(g) for g in A), p)

for name, f in um.mtp_battery(F1):
    print(name, um.mtp_check(d, f))
print("rooted point mass:", um.mtp_check(um.point_mass(F1, [(), (1,)]), lambda E, g: float(g == (1,))))

# zoo at small intensity looks like the uniform translate of its pattern
F2 = GroupSpec("free", 2)
pat = named_pattern(F2, "ball1")
target = um.exact_table(um.finite_urs(F2, pat), 2)
for q in (1e-1, 1e-2, 1e-3):
    t = um.cylinder_probabilities(F2, LocalRule.poisson_zoo(F2, [pat], q), 2, 100_000, seed=0, mode="planted")
    print(q, um.weak_star_distance(t, target), t.meta["density"])
