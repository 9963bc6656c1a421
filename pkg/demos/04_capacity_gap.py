"""How much is knowing the stuck cells worth?

Compares the capacity of a stuck-at memory when the encoder ignores the
defects with the capacity when it knows them, for a few crossover levels.
"""

import numpy as np

from pbchflash.limits import defect_capacities, dpc_capacities

print("Gaussian interference, P = sigma_s^2 = sigma_z^2 = 1:", dpc_capacities(1, 1, 1))
print()
print(" epsilon     p    unknown    known    gain")
for p in (0.0, 0.01, 0.05):
    for eps in np.linspace(0, 0.2, 5):
        c = defect_capacities(eps, p)
        print(f"  {eps:.2f}   {p:.2f}   {c.c_min_plus:.4f}   {c.c_max_plus:.4f}   {c.c_max_plus - c.c_min_plus:.4f}")
