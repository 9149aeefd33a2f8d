"""Three-path contrast interferometer.

A short standing-wave pulse at tau = 0 splits |0> into |0>, |+2>, |-2>; a
second-order Bragg pi pulse centred at tau = T swaps |+2> and |-2>; near
tau = 2T the cos(2X) density grating is read out by backscattered light,
so the signal is |c2(tau)|^2 with c2 the e^{2iX} Fourier coefficient of the
density. The signal oscillates as cos^2(4 tau + Phi), and Phi carries the
diffraction phases of the Bragg pulse.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .analytic import bragg_apply, pi_pulse, rabi_phase, raman_nath_state
from .core import (GAUSSIAN, RECTANGULAR, DegenerateFitError, OutOfValidityWarning,
                   PlaneWaveState, PulseEnvelope, max_workers)
from .propagator import PropagationSettings, free_propagate, propagate

ANALYTIC = "analytic"
NUMERIC = "numeric"

BEAT_FREQUENCY = 4.0
# Phi before reduction mod pi for an exact pi pulse
UNWRAPPED_SIGNAL_PHASE = 7 * math.pi / 3


def bragg_pi_pulse(q: float, center: float) -> PulseEnvelope:
    """Rectangular second-order pi pulse of coupling ``q`` centred on ``center``."""
    if not q > 0:
        raise ValueError("Bragg coupling must be > 0")
    return pi_pulse(RECTANGULAR, 2 * math.pi / q**2, center=center)


@dataclass(frozen=True)
class InterferometerConfig:
    """Parameters of one interferometer run.

    ``bragg_env`` defaults to a rectangular q = 0.2 pi pulse centred on
    ``T``; ``T`` defaults to just after that pulse's half-length. In
    numeric mode the splitting pulse is rectangular with length
    ``splitting_duration`` and area ``gamma``, centred on tau = 0.
    """

    gamma: float = 1.17
    T: float | None = None
    bragg_env: PulseEnvelope | None = None
    detection_start: float | None = None
    detection_length: float = math.pi / 4
    n_samples: int = 64
    mode: str = ANALYTIC
    power_scale: float = 0.0
    splitting_duration: float = 0.0234
    three_state_projection: bool = False
    settings: PropagationSettings = field(default_factory=PropagationSettings)

    def __post_init__(self):
        if self.mode not in (ANALYTIC, NUMERIC):
            raise ValueError(f"mode must be 'analytic' or 'numeric', got {self.mode!r}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError("gamma must be finite and >= 0")
        if not self.splitting_duration > 0:
            raise ValueError("splitting_duration must be > 0")
        if not -1 < self.power_scale:
            raise ValueError("power_scale must be > -1")
        if self.T is None:
            half = (self.bragg_env.duration / 2 if self.bragg_env is not None
                    else math.pi / 0.2**2)
            object.__setattr__(self, "T", half + 5.0)
        if self.bragg_env is None:
            object.__setattr__(self, "bragg_env", bragg_pi_pulse(0.2, self.T))
        if self.detection_start is None:
            object.__setattr__(self, "detection_start", 2.0 * self.T)
        if self.n_samples < 8:
            raise ValueError("n_samples must be >= 8")
        if not self.detection_length > 0:
            raise ValueError("detection_length must be > 0")
        split_end = self.splitting_duration / 2 if self.mode == NUMERIC else 0.0
        if self.bragg_env.tau_start <= split_end:
            raise ValueError("Bragg pulse must start after the splitting pulse")
        if self.detection_start < self.bragg_env.tau_end:
            raise ValueError("detection window must start after the Bragg pulse")

    @property
    def detection_times(self) -> np.ndarray:
        n = self.n_samples
        return self.detection_start + self.detection_length * np.arange(n) / n

    @property
    def scaled_bragg(self) -> PulseEnvelope:
        return self.bragg_env.scaled(1.0 + self.power_scale)


def mit_2002(mode: str = ANALYTIC, T: float = 10.0) -> InterferometerConfig:
    """Preset close to the MIT contrast interferometer.

    Splitting pulse of reduced length 0.157 with gamma = 1.17 (q ~ 3.7) and
    a Gaussian pi pulse with sigma = 0.6, which needs q_max ~ 2.43, well
    beyond the range of the second-order Bragg model.
    """
    warnings.warn("mit-2002 Bragg pulse has q_max ~ 2.43, outside the second-order "
                  "validity range", OutOfValidityWarning, stacklevel=2)
    return InterferometerConfig(gamma=1.17, T=T, bragg_env=pi_pulse(GAUSSIAN, 0.6, center=T),
                                mode=mode, splitting_duration=0.157)


class PhaseFit(NamedTuple):
    phase: float
    amplitude: float
    offset: float
    residual: float
    degenerate: bool


@dataclass(frozen=True)
class SignalTrace:
    taus: np.ndarray
    signal: np.ndarray
    phase: float
    amplitude: float
    offset: float
    residual: float
    degenerate: bool
    mode: str


def grating_amplitude(state: PlaneWaveState) -> complex:
    """e^{2iX} Fourier coefficient of the density: sum_p a_{p+1} conj(a_p)."""
    a = state.amplitudes
    return complex(np.sum(a[1:] * np.conj(a[:-1])))


def extract_phase(taus, signal, angular_frequency: float = BEAT_FREQUENCY) -> PhaseFit:
    """Least-squares fit of ``A cos^2(w tau + Phi) + B``.

    Linear in {1, cos 2w tau, sin 2w tau}, so it is solved directly. Phi is
    returned in [0, pi). A flat signal or a sampling that cannot separate
    the three basis functions gives ``degenerate=True`` and Phi = nan.
    """
    t = np.asarray(taus, dtype=float)
    s = np.asarray(signal, dtype=float)
    if t.shape != s.shape or t.ndim != 1:
        raise ValueError("taus and signal must be 1-D arrays of equal length")
    if t.size < 8:
        raise ValueError("need at least 8 samples")
    coverage = (t.max() - t.min()) * t.size / (t.size - 1)
    if coverage < (math.pi / angular_frequency) * (1 - 1e-9):
        raise ValueError(f"samples must span at least pi/{angular_frequency:g} in tau")

    w2 = 2.0 * angular_frequency
    design = np.column_stack([np.ones_like(t), np.cos(w2 * t), np.sin(w2 * t)])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] < 1e-8 * sv[0]:
        return PhaseFit(math.nan, 0.0, float(s.mean()), float(s.std()), True)
    (c0, cc, cs), *_ = np.linalg.lstsq(design, s, rcond=None)
    amplitude = 2.0 * math.hypot(cc, cs)
    offset = c0 - amplitude / 2
    residual = float(np.sqrt(np.mean((design @ np.array([c0, cc, cs]) - s) ** 2)))
    scale = max(float(np.abs(s).max()), np.finfo(float).tiny)
    if amplitude <= 1e-10 * scale:
        return PhaseFit(math.nan, amplitude, float(s.mean()), residual, True)
    phase = (0.5 * math.atan2(-cs, cc)) % math.pi
    if phase >= math.pi:
        phase = 0.0
    return PhaseFit(phase, amplitude, offset, residual, False)


def _three_state(state: PlaneWaveState) -> PlaneWaveState:
    amps = {p: state.amplitude(p) for p in (-1, 0, 1)}
    return PlaneWaveState.from_orders(amps, kappa=state.kappa, normalize=True)


def state_after_mirror(config: InterferometerConfig) -> PlaneWaveState:
    """State at the end of the Bragg pulse."""
    env = config.scaled_bragg
    if config.mode == ANALYTIC:
        if env.q_max > 1:
            warnings.warn(f"Bragg q_max={env.q_max:.3g} > 1: analytic phases are extrapolated",
                          OutOfValidityWarning, stacklevel=3)
        state = _three_state(raman_nath_state(config.gamma))
        state = free_propagate(state, env.tau_start)
        return bragg_apply(state, env)

    half = config.splitting_duration / 2
    splitter = PulseEnvelope.rectangular(config.gamma / (2 * config.splitting_duration),
                                         -half, half)
    state = propagate(PlaneWaveState.basis(0), splitter, -half, half, config.settings)
    if config.three_state_projection:
        state = _three_state(state)
    return propagate(state, env, half, env.tau_end, config.settings)


def signal_from_state(state: PlaneWaveState, tau0: float, taus) -> np.ndarray:
    """|c2(tau)|^2 for free flight of ``state`` from ``tau0`` to each of ``taus``."""
    dt = np.asarray(taus, dtype=float) - tau0
    amps = state.amplitudes[None, :] * np.exp(-1j * np.outer(dt, state.momenta**2))
    c2 = np.sum(amps[:, 1:] * np.conj(amps[:, :-1]), axis=1)
    return np.abs(c2) ** 2


def simulate(config: InterferometerConfig) -> SignalTrace:
    """Run the interferometer and fit the read-out signal."""
    state = state_after_mirror(config)
    taus = config.detection_times
    signal = signal_from_state(state, config.scaled_bragg.tau_end, taus)
    fit = extract_phase(taus, signal)
    return SignalTrace(taus, signal, fit.phase, fit.amplitude, fit.offset, fit.residual,
                       fit.degenerate, config.mode)


@dataclass(frozen=True)
class SensitivityResult:
    eps: np.ndarray
    phases: np.ndarray
    slope: float
    paper_mode_slope: float
    exact_mode_slope: float

    def per_percent(self, slope: float) -> float:
        return 0.01 * slope


def power_sensitivity(config: InterferometerConfig, eps_list: Sequence[float],
                      workers: int | None = None) -> SensitivityResult:
    """Signal phase versus relative Bragg power offset.

    Each offset scales q_max by (1 + eps), so phi_r goes to (1 + eps)^2 phi_r.
    ``slope`` is the regression slope of the unwrapped phase on eps.
    ``paper_mode_slope`` counts only the level-shift part (4/3) phi_r as
    power dependent; ``exact_mode_slope`` is the derivative of the full
    model phase (11/6) phi_r.
    """
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("eps_list must be a non-empty sequence")
    if np.any(np.abs(eps) > 0.1):
        raise ValueError("power offsets must satisfy |eps| <= 0.1")

    def phase_at(e):
        trace = simulate(replace(config, power_scale=float(e)))
        if trace.degenerate:
            raise DegenerateFitError(f"degenerate signal at eps={e}")
        return trace.phase

    workers = max_workers() if workers is None else workers
    if workers > 1 and eps.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = np.array(list(pool.map(phase_at, eps)))
    else:
        raw = np.array([phase_at(e) for e in eps])

    order = np.argsort(eps, kind="stable")
    phases = np.empty_like(raw)
    phases[order] = np.unwrap(raw[order], period=math.pi)
    if np.ptp(eps) == 0:
        slope = 0.0
    else:
        slope = float(np.polyfit(eps, phases, 1)[0])
    phi_r = rabi_phase(config.bragg_env)
    return SensitivityResult(eps, phases, slope, 2 * (4.0 / 3.0) * phi_r,
                             2 * (11.0 / 6.0) * phi_r)
