"""Phases written by a second-order Bragg mirror pulse.

A rectangular pulse with q^2 T / 2 = pi swaps |+2> and |-2>. The central
order |0> is light shifted by -q^2/2 and comes out with phase +pi; the
swapped pair carries -5 pi / 6 on top of its free evolution.
"""
import math

import numpy as np

from mattersim import PlaneWaveState, bragg_apply, bragg_pi_pulse, propagate

for q in (0.1, 0.2, 0.3):
    env = bragg_pi_pulse(q, center=0.0)
    dt = env.duration
    t0 = env.tau_start
    zero = propagate(PlaneWaveState.basis(0), env, t0, env.tau_end)
    plus = propagate(PlaneWaveState.basis(1), env, t0, env.tau_end)
    ref = bragg_apply(PlaneWaveState.basis(1), env)
    swap = plus.amplitude(-1) * np.exp(4j * dt)
    print(f"q = {q}: pulse length {dt:8.2f}")
    print(f"  |0>  phase {np.angle(zero.amplitude(0)):+.4f}   (pi = {math.pi:.4f})")
    print(f"  |+2> -> |-2>: transfer {abs(swap)**2:.5f}, phase {np.angle(swap):+.4f}"
          f"   (model {np.angle(ref.amplitude(-1) * np.exp(4j * dt)):+.4f})")
