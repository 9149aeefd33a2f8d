"""Bloch bands of a matter wave in a standing light wave.

Prints the lowest bands at a few couplings q and compares the ground
level at kappa = 0 with its second-order estimate -q^2/2.
"""
import numpy as np

from mattersim import band_structure, ground_energy_shift

for q in (0.0, 0.3, 1.0):
    bs = band_structure(q, n_kappa=8, n_bands=3)
    print(f"q = {q}")
    print("  kappa   " + "  ".join(f"band {b}" for b in range(3)))
    for k, row in zip(bs.kappa, bs.energies):
        print(f"  {k:+.3f}  " + "  ".join(f"{e:7.4f}" for e in row))

# the gap at the zone edge opens linearly in q
for q in (0.01, 0.05, 0.1):
    e = band_structure(q, n_kappa=2, n_bands=2).energies[-1]
    print(f"q = {q:<5} gap at kappa = 1: {e[1] - e[0]:.5f}  (2q = {2 * q:.5f})")

print("\n   q     E0(q)       -q^2/2     relative deviation")
for q in np.array([0.1, 0.3, 0.5, 1.0]):
    e0 = ground_energy_shift(q)
    print(f"{q:5.2f}  {e0:10.6f}  {-q**2 / 2:10.6f}  {abs(e0 + q**2 / 2) / (q**2 / 2):.4f}")
