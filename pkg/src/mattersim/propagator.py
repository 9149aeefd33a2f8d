"""Unitary integration of the reduced Schrodinger equation on the momentum ladder.

In the plane-wave basis the standing-wave Hamiltonian is tridiagonal:
(kappa + 2p)^2 on the diagonal and q(tau) between neighbouring orders.
Pulses are integrated with the Cayley (Crank-Nicolson) one-step map

    (1 + i H h / 2) psi' = (1 - i H h / 2) psi,

which is exactly unitary. Free flight is applied in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (RECTANGULAR, ConvergenceError, PlaneWaveState, PulseEnvelope)

# steps are chosen so that h * (1 + spectral span) <= this
STEP_SCALE = 0.05
# basis edges are inspected after every chunk of roughly this duration
CHUNK_DURATION = 0.05
MAX_CHUNK_STEPS = 1024
BASIS_GROWTH = 4
MAX_BASIS = 4001
# work limits per pulse segment: chunks for any pulse, steps for shaped pulses
MAX_CHUNKS = 200_000
MAX_STEPS = 20_000_000
INITIAL_MARGIN = 2


@dataclass(frozen=True)
class PropagationSettings:
    phase_tolerance: float = 1e-4
    max_step: float = 0.01
    truncation_threshold: float = 1e-12
    min_step: float = 1e-12

    def __post_init__(self):
        if not self.phase_tolerance > 0:
            raise ValueError("phase_tolerance must be > 0")
        if not self.max_step > 0:
            raise ValueError("max_step must be > 0")
        if not 0 < self.truncation_threshold <= 1e-6:
            raise ValueError("truncation_threshold must lie in (0, 1e-6]")


@dataclass(frozen=True)
class PropagationReport:
    error_estimate: float
    halvings: int
    steps: int
    p_min: int
    p_max: int


def free_propagate(state: PlaneWaveState, dtau: float) -> PlaneWaveState:
    """Exact free flight: a_p -> exp(-i (kappa + 2p)^2 dtau) a_p."""
    if not (math.isfinite(dtau) and dtau >= 0):
        raise ValueError(f"dtau must be finite and >= 0, got {dtau}")
    if dtau == 0:
        return state
    phase = np.exp(-1j * state.momenta**2 * dtau)
    return PlaneWaveState(state.kappa, state.p_min, state.amplitudes * phase)


def diffraction_spectrum(state: PlaneWaveState):
    """``[(p, |a_p|^2, arg a_p), ...]`` with phases in (-pi, pi]."""
    phases = np.angle(state.amplitudes)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    return [(int(p), float(pop), float(ph))
            for p, pop, ph in zip(state.orders, state.populations, phases)]


def propagate(state: PlaneWaveState, env: PulseEnvelope, tau_a: float, tau_b: float,
              settings: PropagationSettings | None = None, energy_offset: float = 0.0,
              full_output: bool = False):
    """Evolve ``state`` from ``tau_a`` to ``tau_b`` under the pulse ``env``.

    Parameters
    ----------
    state : PlaneWaveState
        Normalized initial state at ``tau_a``.
    env : PulseEnvelope
        Coupling q(tau); zero outside its support.
    tau_a, tau_b : float
        Start and end times, ``tau_a <= tau_b``.
    settings : PropagationSettings, optional
        Accuracy and basis-truncation controls.
    energy_offset : float
        Constant added to every diagonal element. It only contributes the
        global phase exp(-i offset (tau_b - tau_a)), applied exactly.
    full_output : bool
        Also return a :class:`PropagationReport`.

    Returns
    -------
    PlaneWaveState, or (PlaneWaveState, PropagationReport)

    Notes
    -----
    Step sizes follow h <= min(max_step, 0.05 / (1 + span)) with span the
    Gershgorin width of the current truncated Hamiltonian; the whole run is
    then repeated with halved steps until the two results agree on every
    amplitude to ``phase_tolerance``. The finer run is returned. The basis
    grows by four orders on a side whenever its two outermost orders there
    hold more than ``truncation_threshold`` of the population.
    """
    settings = settings or PropagationSettings()
    if not (math.isfinite(tau_a) and math.isfinite(tau_b)):
        raise ValueError("propagation times must be finite")
    if tau_b < tau_a:
        raise ValueError(f"tau_b={tau_b} precedes tau_a={tau_a}")

    segments = _segments(env, tau_a, tau_b)
    has_pulse = any(kind != "free" for kind, _, _ in segments)
    run = _Run(state, env, settings, energy_offset)

    if not has_pulse:
        amps, p_min, steps = run(segments, 0)
        out = PlaneWaveState(state.kappa, p_min, amps)
        report = PropagationReport(0.0, 0, steps, out.p_min, out.p_max)
        return (out, report) if full_output else out

    level = 0
    coarse = run(segments, level)
    while True:
        fine = run(segments, level + 1)
        err = _max_difference(coarse, fine)
        if err <= settings.phase_tolerance:
            break
        level += 1
        if run.smallest_step < settings.min_step:
            raise ConvergenceError(
                f"step size fell below {settings.min_step} without reaching "
                f"phase_tolerance={settings.phase_tolerance} (estimate {err:.3g})"
            )
        coarse = fine
    amps, p_min, steps = fine
    out = PlaneWaveState(state.kappa, p_min, amps)
    if full_output:
        return out, PropagationReport(err, level + 1, steps, out.p_min, out.p_max)
    return out


def _segments(env, tau_a, tau_b):
    """Split [tau_a, tau_b] at the pulse edges; label each piece."""
    cuts = {tau_a, tau_b}
    if not env.is_off:
        cuts.update(t for t in (env.tau_start, env.tau_end) if tau_a < t < tau_b)
    cuts = sorted(cuts)
    out = []
    for a, b in zip(cuts, cuts[1:]):
        if env.is_off or b <= env.tau_start or a >= env.tau_end:
            kind = "free"
        elif env.shape == RECTANGULAR:
            kind = "constant"
        else:
            kind = "varying"
        out.append((kind, a, b))
    return out


def _max_difference(r1, r2):
    a1, lo1, _ = r1
    a2, lo2, _ = r2
    lo = min(lo1, lo2)
    hi = max(lo1 + len(a1), lo2 + len(a2))
    v1 = np.zeros(hi - lo, dtype=complex)
    v2 = np.zeros(hi - lo, dtype=complex)
    v1[lo1 - lo:lo1 - lo + len(a1)] = a1
    v2[lo2 - lo:lo2 - lo + len(a2)] = a2
    return float(np.abs(v1 - v2).max())


def _cayley(d, q, h):
    """Batched one-step maps for diagonal ``d`` and couplings ``q`` (shape (m,))."""
    n = d.size
    q = np.atleast_1d(q)
    hm = np.zeros((q.size, n, n), dtype=complex)
    idx = np.arange(n)
    hm[:, idx, idx] = d
    hm[:, idx[:-1], idx[1:]] = q[:, None]
    hm[:, idx[1:], idx[:-1]] = q[:, None]
    eye = np.eye(n)
    return np.linalg.solve(eye + 0.5j * h * hm, eye - 0.5j * h * hm)


def _unitarize(u):
    """Nearest unitary matrix (polar factor); removes accumulated roundoff."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def _chain(mats):
    """Ordered product mats[m-1] @ ... @ mats[0] by pairwise reduction."""
    while len(mats) > 1:
        tail = mats[-1:] if len(mats) % 2 else None
        body = mats[:-1] if tail is not None else mats
        mats = body[1::2] @ body[0::2]
        if tail is not None:
            mats = np.concatenate([mats, tail])
    return mats[0]


class _Run:
    """One fixed-refinement sweep over all segments."""

    def __init__(self, state, env, settings, energy_offset):
        self.kappa = state.kappa
        self.env = env
        self.settings = settings
        self.offset = float(energy_offset)
        self.ref = state.kappa**2
        self.initial = state.padded(state.p_min - INITIAL_MARGIN, state.p_max + INITIAL_MARGIN)
        self.smallest_step = math.inf

    def __call__(self, segments, level):
        amps = self.initial.amplitudes.copy()
        p_min = self.initial.p_min
        steps = 0
        for kind, a, b in segments:
            if kind == "free":
                k2 = (self.kappa + 2.0 * np.arange(p_min, p_min + amps.size)) ** 2
                amps = amps * np.exp(-1j * (k2 + self.offset) * (b - a))
            else:
                amps, p_min, n = self._pulse(amps, p_min, kind, a, b, level)
                steps += n
        return amps, p_min, steps

    def _edges(self, amps):
        thr = self.settings.truncation_threshold
        pops = np.abs(amps) ** 2
        return pops[:2].sum() > thr, pops[-2:].sum() > thr

    def _grow(self, amps, p_min, low, high):
        lo = BASIS_GROWTH if low else 0
        hi = BASIS_GROWTH if high else 0
        if amps.size + lo + hi > MAX_BASIS:
            raise ConvergenceError("momentum basis grew beyond its cap")
        return np.concatenate([np.zeros(lo, complex), amps, np.zeros(hi, complex)]), p_min - lo

    def _pulse(self, amps, p_min, kind, a, b, level):
        env = self.env
        t = a
        steps = 0
        low, high = self._edges(amps)
        while True:
            while low or high:
                amps, p_min = self._grow(amps, p_min, low, high)
                low, high = self._edges(amps)

            p = np.arange(p_min, p_min + amps.size)
            d = (self.kappa + 2.0 * p) ** 2 - self.ref
            span = d.max() - d.min() + 4.0 * env.q_max
            h0 = min(self.settings.max_step, STEP_SCALE / (1.0 + span))
            n_total = max(1, math.ceil((b - t) / h0 - 1e-9)) * 2**level
            h = (b - t) / n_total
            self.smallest_step = min(self.smallest_step, h)
            per_chunk = int(min(MAX_CHUNK_STEPS, max(1, round(CHUNK_DURATION / h))))
            if (math.ceil(n_total / per_chunk) > MAX_CHUNKS
                    or (kind == "varying" and n_total > MAX_STEPS)):
                raise ConvergenceError("work budget exceeded; loosen phase_tolerance "
                                       "or raise max_step")
            phase_step = np.exp(-1j * (self.ref + self.offset) * h)

            if kind == "constant":
                one = _cayley(d, env.q_max, h)[0]
                full_chunk = _unitarize(np.linalg.matrix_power(one, per_chunk))

            done = 0
            grew = False
            while done < n_total:
                m = min(per_chunk, n_total - done)
                if kind == "constant":
                    u = full_chunk if m == per_chunk else _unitarize(np.linalg.matrix_power(one, m))
                else:
                    mids = t + (done + 0.5 + np.arange(m)) * h
                    u = _unitarize(_chain(_cayley(d, env(mids), h)))
                new = (u @ amps) * phase_step**m
                low, high = self._edges(new)
                if low or high:
                    grew = True
                    break
                amps = new
                done += m
            steps += done
            if not grew:
                return amps, p_min, steps
            t = t + done * h
