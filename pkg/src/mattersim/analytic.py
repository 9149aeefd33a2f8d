"""Closed-form diffraction models.

Raman-Nath amplitudes from Bessel functions, the second-order Bragg
two-level model with its level shifts, the Rabi phase of a pulse, and
pi-pulse design. All quantities are in recoil units.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln as special_gammaln

from .core import (GAUSSIAN, GAUSSIAN_TRUNCATION, RECTANGULAR, TABULATED,
                   OutOfValidityWarning, PlaneWaveState, PulseEnvelope)

BESSEL_MAX_ORDER = 64
BESSEL_MAX_ARG = 64.0

_RESCALE_AT = 1e250

def bessel_j_orders(n_max: int, x: float) -> np.ndarray:
    """J_0(x) ... J_{n_max}(x) by Miller's downward recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started well above
    both ``n_max`` and ``x`` from an arbitrary seed and normalized with
    J_0 + 2 * sum_k J_{2k} = 1.
    """
    if int(n_max) != n_max or not 0 <= n_max <= BESSEL_MAX_ORDER:
        raise ValueError(f"order must be an integer in [0, {BESSEL_MAX_ORDER}], got {n_max}")
    if not (math.isfinite(x) and 0.0 <= x <= BESSEL_MAX_ARG):
        raise ValueError(f"argument must be in [0, {BESSEL_MAX_ARG}], got {x}")
    n_max = int(n_max)
    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out

    if x < 1e-8:
        # two-term power series; the next term is below 1e-32 relative
        n = np.arange(n_max + 1)
        h = 0.5 * x
        with np.errstate(under="ignore"):
            lead = np.exp(n * (math.log(x) - math.log(2.0)) - special_gammaln(n + 1))
        return lead * (1.0 - h * h / (n + 1))

    start = 2 * max(n_max, math.ceil(x)) + 20
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1e-30
    for k in range(start, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > _RESCALE_AT:
            vals /= _RESCALE_AT
    norm = vals[0] + 2.0 * vals[2:start + 1:2].sum()
    return vals[:n_max + 1] / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for 0 <= n, x <= 64."""
    return float(bessel_j_orders(n, x)[n])


def raman_nath_state(gamma: float, p_span: int | None = None,
                     kappa: float = 0.0) -> PlaneWaveState:
    """Thin-grating state sum_p (-i)^|p| J_|p|(gamma) |2p>.

    With ``p_span=None`` the smallest span holding all but 1e-10 of the
    population is used; an explicit span that is too small raises.
    """
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    need = _raman_nath_span(gamma)
    if p_span is None:
        p_span = need
    elif p_span < need:
        raise ValueError(
            f"p_span={p_span} too small for gamma={gamma}: needs {need} to hold 1 - 1e-10"
        )
    if p_span > BESSEL_MAX_ORDER:
        raise ValueError(f"p_span limited to {BESSEL_MAX_ORDER}")
    j = bessel_j_orders(p_span, gamma)
    p = np.arange(-p_span, p_span + 1)
    amps = (-1j) ** np.abs(p) * j[np.abs(p)]
    return PlaneWaveState(kappa, -p_span, amps)


def _raman_nath_span(gamma: float) -> int:
    if gamma == 0:
        return 1
    n_max = min(BESSEL_MAX_ORDER, math.ceil(gamma) + 30)
    j = bessel_j_orders(n_max, gamma)
    weight = j[0] ** 2
    for n in range(1, n_max + 1):
        weight += 2 * j[n] ** 2
        if weight >= 1.0 - 1e-10:
            return n
    raise ValueError(f"gamma={gamma} needs more than {BESSEL_MAX_ORDER} orders")


def raman_nath_validity_bound(q: float) -> float:
    """Longest pulse for which the thin-grating result holds: 1/(4 sqrt(q))."""
    if not (math.isfinite(q) and q > 0):
        raise ValueError("q must be > 0 (the bound is unbounded at q = 0)")
    return 1.0 / (4.0 * math.sqrt(q))


def rabi_phase(env: PulseEnvelope) -> float:
    """Integral of q(tau)^2 / 2 over the pulse.

    Closed forms for every shape: rectangular q^2 T / 2, truncated Gaussian
    q^2 sigma sqrt(pi) erf(5) / 2, and an exact segment-wise integral of
    the squared linear interpolant for tabulated pulses.
    """
    if env.is_off:
        return 0.0
    if env.shape == RECTANGULAR:
        return 0.5 * env.q_max**2 * env.duration
    if env.shape == GAUSSIAN:
        return 0.5 * env.q_max**2 * env.sigma * math.sqrt(math.pi) * math.erf(GAUSSIAN_TRUNCATION)
    taus, qs = np.array(env.samples).T
    dt = np.diff(taus)
    a, b = qs[:-1], qs[1:]
    return float(0.5 * np.sum(dt * (a * a + a * b + b * b) / 3.0))


@dataclass(frozen=True)
class BraggEffectiveModel:
    """Second-order model of the |+2>, |-2> pair and the |0> level shift."""

    q: float
    e0_shift: float
    diag: float
    coupling: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.diag, self.coupling], [self.coupling, self.diag]])

    @property
    def splitting(self) -> float:
        return 2.0 * self.coupling


def effective_two_level(q: float) -> BraggEffectiveModel:
    """Second-order effective Hamiltonian at coupling ``q``.

    Warns with :class:`OutOfValidityWarning` for q > 1, where the
    neglected q^4 terms exceed roughly 10 % of the q^2 ones.
    """
    if not (math.isfinite(q) and q >= 0):
        raise ValueError(f"q must be finite and >= 0, got {q}")
    if q > 1:
        warnings.warn(f"q={q} > 1: second-order Bragg model is extrapolated",
                      OutOfValidityWarning, stacklevel=2)
    q2 = q * q
    return BraggEffectiveModel(q=q, e0_shift=-q2 / 2, diag=4 + q2 / 6, coupling=q2 / 4)


def bragg_apply(state: PlaneWaveState, env: PulseEnvelope) -> PlaneWaveState:
    """Apply a second-order Bragg pulse to a state living on p in {-1, 0, 1}.

    |0> picks up exp(+i phi_r); the |+2>, |-2> pair is rotated by the
    resonant two-level map with Rabi phase phi_r and shifted by
    exp(-i (4 T + phi_r / 3)), T being the pulse support length.
    """
    if state.kappa != 0.0:
        raise ValueError("bragg_apply is defined at kappa = 0 only")
    if state.p_min > -1 or state.p_max < 1:
        state = state.padded(min(state.p_min, -1), max(state.p_max, 1))
    pops = state.populations
    outside = pops[np.abs(state.orders) > 1].sum()
    if outside > 1e-9:
        raise ValueError(f"population {outside:.3g} outside p in {{-1, 0, 1}}")
    phi = rabi_phase(env)
    dt = env.duration
    a_m, a_0, a_p = state.amplitude(-1), state.amplitude(0), state.amplitude(1)
    common = np.exp(-1j * (4.0 * dt + phi / 3.0))
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    amps = np.zeros_like(state.amplitudes)
    i0 = -state.p_min
    amps[i0 - 1] = common * (c * a_m - 1j * s * a_p)
    amps[i0] = np.exp(1j * phi) * a_0
    amps[i0 + 1] = common * (c * a_p - 1j * s * a_m)
    return PlaneWaveState(0.0, state.p_min, amps)


def design_pi_pulse(shape: str, duration: float | None = None, *,
                    template: PulseEnvelope | None = None) -> float:
    """Peak coupling that makes the Rabi phase equal to pi.

    ``duration`` is the pulse length for rectangular pulses and sigma for
    Gaussian ones. Tabulated pulses are designed by scaling ``template``;
    the returned value is the peak q of the scaled template.
    """
    if shape == RECTANGULAR:
        _positive(duration)
        return math.sqrt(2.0 * math.pi / duration)
    if shape == GAUSSIAN:
        _positive(duration)
        return math.sqrt(2.0 * math.pi
                         / (duration * math.sqrt(math.pi) * math.erf(GAUSSIAN_TRUNCATION)))
    if shape == TABULATED:
        if template is None or template.shape != TABULATED:
            raise ValueError("tabulated design needs a tabulated template")
        base = rabi_phase(template)
        if base <= 0:
            raise ValueError("template pulse has zero area")
        hi = 2.0 * math.sqrt(math.pi / base)
        s = brentq(lambda f: rabi_phase(template.scaled(f)) - math.pi, 0.0, hi,
                   xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return template.q_max * s
    raise ValueError(f"unknown pulse shape {shape!r}")


def pi_pulse(shape: str, duration: float, start: float = 0.0,
             center: float | None = None) -> PulseEnvelope:
    """Ready-made pi pulse: rectangular from ``start`` or Gaussian at ``center``."""
    q = design_pi_pulse(shape, duration)
    if shape == RECTANGULAR:
        if center is not None:
            start = center - duration / 2
        return PulseEnvelope.rectangular(q, start, start + duration)
    if shape == GAUSSIAN:
        return PulseEnvelope.gaussian(q, start if center is None else center, duration)
    raise ValueError("pi_pulse supports rectangular and gaussian shapes")


def _positive(x):
    if x is None or not (math.isfinite(x) and x > 0):
        raise ValueError(f"pulse duration must be > 0, got {x}")
