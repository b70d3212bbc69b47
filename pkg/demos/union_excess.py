# How much does the support of V stick out of the support of U, for V inside U?
# Relative excess shrinks slowly as U gets sparser.
from esmlab import bounds

dens = [2.0**-k for k in range(3, 11)]
tab = bounds.excess_rate_experiment(14, dens, 20, seed=0)
print("fitted C", tab.C)
for r in tab.rows:
    print("mu=%.5f  excess=%.4f +- %.4f  C*profile=%.4f" % (r["mu"], r["excess_mean"], r["excess_sd"], r["bound"]))
