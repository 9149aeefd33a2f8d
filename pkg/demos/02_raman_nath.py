"""Short-pulse diffraction: Bessel amplitudes versus the exact dynamics.

A pulse of coupling q and length tau has area gamma = 2 q tau. While tau
stays below 1/(4 sqrt(q)) the orders follow (-i)^|p| J_|p|(gamma); past
that the atoms move during the pulse and the two part ways.
"""
import numpy as np

from mattersim import (PlaneWaveState, PulseEnvelope, propagate, raman_nath_state,
                       raman_nath_validity_bound)

q, tau = 25.0, 0.004
out = propagate(PlaneWaveState.basis(0), PulseEnvelope.rectangular(q, 0.0, tau), 0.0, tau)
rn = raman_nath_state(2 * q * tau)
print(f"q = {q}, tau = {tau}, gamma = {2 * q * tau}")
print(" p   population(num)  population(Bessel)  phase(num)  phase(Bessel)")
for p in range(4):
    a, b = out.amplitude(p), rn.amplitude(p)
    print(f"{p:2d}   {abs(a)**2:.6e}     {abs(b)**2:.6e}     {np.angle(a):+.4f}     "
          f"{np.angle(b):+.4f}")

q = 3.7
bound = raman_nath_validity_bound(q)
print(f"\nq = {q}: validity bound tau = {bound:.4f}")
for f in (0.25, 0.5, 1.0, 2.0, 4.0):
    t = f * bound
    num = propagate(PlaneWaveState.basis(0), PulseEnvelope.rectangular(q, 0.0, t), 0.0, t)
    ref = raman_nath_state(2 * q * t)
    lo, hi = min(num.p_min, ref.p_min), max(num.p_max, ref.p_max)
    dev = np.abs(num.padded(lo, hi).populations - ref.padded(lo, hi).populations).max()
    print(f"  tau = {f:4} x bound: largest population error {dev:.2e}")
