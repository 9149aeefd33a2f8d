"""Reduced units, pulse envelopes and the plane-wave state.

Everything downstream works in recoil units: energies in hbar*omega_rec,
time tau = omega_rec * t, position X = k_L * x and momentum kappa = k_x / k_L.
A standing wave couples |kappa + 2p> only to |kappa + 2(p +/- 1)>, so a state
is a vector of complex amplitudes on that ladder.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

HBAR = 1.054571817e-34

NORM_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Raised when a numerical routine fails to reach its tolerance."""


class DegenerateFitError(RuntimeError):
    """Raised when a signal carries no fittable oscillation."""


class OutOfValidityWarning(UserWarning):
    """Emitted when an analytic model is used outside its stated range."""


def max_workers() -> int:
    """Worker cap for parallel sweeps, from ``MATTERSIM_THREADS``."""
    raw = os.environ.get("MATTERSIM_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"MATTERSIM_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError("MATTERSIM_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class PhysicalConfig:
    """Recoil frequency plus optional informational k_L and atomic mass."""

    recoil_angular_frequency: float
    laser_wavevector: float | None = None
    atomic_mass: float | None = None

    def __post_init__(self):
        w = self.recoil_angular_frequency
        if not (math.isfinite(w) and w > 0):
            raise ValueError("recoil_angular_frequency must be finite and > 0")
        if self.laser_wavevector is not None and self.atomic_mass is not None:
            expected = HBAR * self.laser_wavevector**2 / (2 * self.atomic_mass)
            if abs(expected - w) > 1e-9 * abs(expected):
                raise ValueError(
                    f"recoil_angular_frequency {w} inconsistent with hbar k_L^2/2m = {expected}"
                )

    @classmethod
    def from_atom(cls, laser_wavevector: float, atomic_mass: float) -> "PhysicalConfig":
        w = HBAR * laser_wavevector**2 / (2 * atomic_mass)
        return cls(w, laser_wavevector, atomic_mass)


def to_reduced(cfg: PhysicalConfig, t: float) -> float:
    """Convert a time in seconds to the dimensionless tau = omega_rec * t."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return cfg.recoil_angular_frequency * t


def q_from_potential(v0: float) -> float:
    """Reduced coupling q = V0 / 4 for a light-shift depth V0 in recoil units."""
    if not math.isfinite(v0) or v0 < 0:
        raise ValueError(f"V0 must be finite and >= 0, got {v0}")
    return v0 / 4.0


GAUSSIAN_TRUNCATION = 5.0

RECTANGULAR = "rectangular"
GAUSSIAN = "gaussian"
TABULATED = "tabulated"
SHAPES = (RECTANGULAR, GAUSSIAN, TABULATED)


@dataclass(frozen=True)
class PulseEnvelope:
    """Time profile q(tau) of the reduced coupling.

    Use the ``rectangular``, ``gaussian`` and ``tabulated`` constructors
    rather than building one by hand. Gaussian pulses are truncated at
    +/- 5 sigma; every envelope is exactly zero outside
    ``[tau_start, tau_end]``.
    """

    shape: str
    q_max: float
    tau_start: float
    tau_end: float
    center: float | None = None
    sigma: float | None = None
    samples: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown envelope shape {self.shape!r}")
        if not (math.isfinite(self.q_max) and self.q_max >= 0):
            raise ValueError(f"q_max must be finite and >= 0, got {self.q_max}")
        if not (math.isfinite(self.tau_start) and math.isfinite(self.tau_end)):
            raise ValueError("pulse support must be finite")
        if self.tau_end < self.tau_start:
            raise ValueError("tau_end must be >= tau_start")
        if self.shape == GAUSSIAN:
            if self.sigma is None or self.center is None or not self.sigma > 0:
                raise ValueError("gaussian envelope needs center and sigma > 0")
        if self.shape == TABULATED:
            if not self.samples or len(self.samples) < 2:
                raise ValueError("tabulated envelope needs at least two samples")
            taus = [s[0] for s in self.samples]
            if any(b <= a for a, b in zip(taus, taus[1:])):
                raise ValueError("tabulated samples must be strictly increasing in tau")
            if any(s[1] < 0 or not math.isfinite(s[1]) for s in self.samples):
                raise ValueError("tabulated q values must be finite and >= 0")

    @classmethod
    def rectangular(cls, q_max: float, tau_start: float, tau_end: float) -> "PulseEnvelope":
        return cls(RECTANGULAR, float(q_max), float(tau_start), float(tau_end))

    @classmethod
    def gaussian(cls, q_max: float, center: float, sigma: float) -> "PulseEnvelope":
        if not sigma > 0:
            raise ValueError("sigma must be > 0")
        half = GAUSSIAN_TRUNCATION * sigma
        return cls(GAUSSIAN, float(q_max), center - half, center + half,
                   center=float(center), sigma=float(sigma))

    @classmethod
    def tabulated(cls, taus: Sequence[float], qs: Sequence[float]) -> "PulseEnvelope":
        if len(taus) != len(qs):
            raise ValueError("taus and qs must have the same length")
        samples = tuple((float(t), float(q)) for t, q in zip(taus, qs))
        if len(samples) < 2:
            raise ValueError("tabulated envelope needs at least two samples")
        return cls(TABULATED, max(q for _, q in samples), samples[0][0], samples[-1][0],
                   samples=samples)

    @classmethod
    def off(cls) -> "PulseEnvelope":
        """The envelope that is zero everywhere."""
        return cls.rectangular(0.0, 0.0, 0.0)

    @property
    def duration(self) -> float:
        return self.tau_end - self.tau_start

    @property
    def is_off(self) -> bool:
        return self.q_max == 0.0 or self.tau_end == self.tau_start

    def scaled(self, factor: float) -> "PulseEnvelope":
        """Same time profile with q multiplied by ``factor`` (power scaling)."""
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        if self.shape == TABULATED:
            taus, qs = zip(*self.samples)
            return PulseEnvelope.tabulated(taus, [factor * q for q in qs])
        return PulseEnvelope(self.shape, self.q_max * factor, self.tau_start, self.tau_end,
                             self.center, self.sigma, self.samples)

    def shifted(self, offset: float) -> "PulseEnvelope":
        if self.shape == TABULATED:
            taus, qs = zip(*self.samples)
            return PulseEnvelope.tabulated([t + offset for t in taus], qs)
        center = None if self.center is None else self.center + offset
        return PulseEnvelope(self.shape, self.q_max, self.tau_start + offset,
                             self.tau_end + offset, center, self.sigma, self.samples)

    def __call__(self, tau):
        return envelope_value(self, tau)


def envelope_value(env: PulseEnvelope, tau):
    """Evaluate q(tau); accepts scalars or arrays, zero outside the support."""
    t = np.asarray(tau, dtype=float)
    inside = (t >= env.tau_start) & (t <= env.tau_end)
    if env.shape == RECTANGULAR:
        out = np.where(inside, env.q_max, 0.0)
    elif env.shape == GAUSSIAN:
        out = np.where(inside, env.q_max * np.exp(-((t - env.center) ** 2) / (2 * env.sigma**2)), 0.0)
    else:
        taus, qs = np.array(env.samples).T
        out = np.interp(t, taus, qs, left=0.0, right=0.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PlaneWaveState:
    """Amplitudes ``a_p`` on the momentum ladder ``|kappa + 2p>``.

    ``amplitudes[i]`` belongs to order ``p_min + i``. The array is copied
    and frozen on construction.
    """

    kappa: float
    p_min: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (-1.0 < self.kappa <= 1.0):
            raise ValueError(f"kappa must lie in (-1, 1], got {self.kappa}")
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size == 0:
            raise ValueError("state needs at least one amplitude")
        object.__setattr__(self, "p_min", int(self.p_min))
        if not self.p_min <= 0 <= self.p_min + amps.size - 1:
            raise ValueError("order range must contain p = 0")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (sum |a_p|^2 = {norm:.12g})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def p_max(self) -> int:
        return self.p_min + len(self.amplitudes) - 1

    @property
    def orders(self) -> np.ndarray:
        return np.arange(self.p_min, self.p_max + 1)

    @property
    def momenta(self) -> np.ndarray:
        return self.kappa + 2.0 * self.orders

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(self.populations.sum())

    def amplitude(self, p: int) -> complex:
        if self.p_min <= p <= self.p_max:
            return complex(self.amplitudes[p - self.p_min])
        return 0j

    def padded(self, p_min: int, p_max: int) -> "PlaneWaveState":
        """Embed into a larger order range, zero-filling new orders."""
        if p_min > self.p_min or p_max < self.p_max:
            raise ValueError("padded range must contain the current range")
        out = np.zeros(p_max - p_min + 1, dtype=complex)
        out[self.p_min - p_min:self.p_max - p_min + 1] = self.amplitudes
        return PlaneWaveState(self.kappa, p_min, out)

    @classmethod
    def basis(cls, p: int = 0, kappa: float = 0.0, p_span: int | None = None) -> "PlaneWaveState":
        """The single plane wave |kappa + 2p>."""
        span = max(abs(p), 1) if p_span is None else p_span
        if abs(p) > span:
            raise ValueError("p outside requested span")
        amps = np.zeros(2 * span + 1, dtype=complex)
        amps[p + span] = 1.0
        return cls(kappa, -span, amps)

    @classmethod
    def from_orders(cls, amplitudes: Mapping[int, complex], kappa: float = 0.0,
                    normalize: bool = False) -> "PlaneWaveState":
        """Build from ``{p: a_p}``; the range is widened to include p = 0."""
        if not amplitudes:
            raise ValueError("no amplitudes given")
        lo = min(min(amplitudes), 0)
        hi = max(max(amplitudes), 0)
        amps = np.zeros(hi - lo + 1, dtype=complex)
        for p, a in amplitudes.items():
            amps[p - lo] = a
        if normalize:
            amps /= np.linalg.norm(amps)
        return cls(kappa, lo, amps)
