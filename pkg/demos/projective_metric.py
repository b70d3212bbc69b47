# Projective distance between positive vectors, squeezed between ratio bounds.
import numpy as np
from esmlab import bounds

u = np.array([1.0, 2.0, 3.0])
print(bounds.proj_distance(u, 2 * u))                   # same ray
print(bounds.proj_distance([1, 1], [1, 0]))              # 1/sqrt(2)
print(bounds.check_proj_sandwich(u, [1.0, 2.5, 2.0]))

out = bounds.proj_sweep(2000, range(2, 6), seed=1)
print(out)
