# Poisson zoo on the free group: plant translates of a pattern at sparse seeds.
from esmlab.groups import GroupSpec
from esmlab import fiid

F2 = GroupSpec("free", 2)
rule = fiid.parse_rule("zoo:q=0.01,pat=ball1", F2)
cfg = fiid.sample_config(F2, rule, 6, seed=3)
print(rule, "window", int(cfg.window.sum()), "members", int((cfg.membership & cfg.window).sum()))
print("components", fiid.components(cfg)[:10])
print(fiid.component_stats(cfg))

# root density, against 1 - (1-q)^5
for q in (1e-2, 1e-3):
    p, ci = fiid.density_estimate(F2, rule.with_intensity(F2, q), 6, 100_000, seed=0)
    print(q, p, ci, 1 - (1 - q) ** 5)

# the same seed on a larger ball keeps every label it already had
big = fiid.sample_config(F2, rule, 8, seed=3)
print(all(big.member(g) == cfg.member(g) for g in cfg.ball.vertices[:200]))
