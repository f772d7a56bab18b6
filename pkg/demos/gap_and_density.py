"""How frame bounds limit the holes of an irregular space-time sampling set."""

import numpy as np

from dynsamp import gapanalysis as ga
from dynsamp.kernel import KernelSpec

k = KernelSpec.gaussian(1.0, 0.5)
for L in (0.5, 1.0, 4.0):
    dc = ga.decay_constants(k, L)
    R, dminus, dplus = ga.max_gap_bound(1.0, 10.0, k, L)
    print(f"L={L}: c_lower={dc.c_lower:.4f} C={dc.packaged_C:.3f} "
          f"R<={R:.1f} D-> {dminus:.2e} D+<= {dplus:.2f}")

x = np.linspace(0, 40, 9)
e = ga.sinc_flow_energy(k, 1.0, x)
for xi, ei in zip(x, e):
    print(f"x={xi:5.1f}  energy={ei:.3e}  (1+x^2)*energy={(1 + xi * xi) * ei:.3f}")

S = ga.lu_vetterli_set(3, 5, (0, 10_000))
print(f"Lu-Vetterli m=3 n=5: density {S.density():.4f}, exact {ga.lu_vetterli_density(3, 5):.4f}")
