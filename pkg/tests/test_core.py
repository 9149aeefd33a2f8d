import math

import numpy as np
import pytest

from mattersim.core import (HBAR, PhysicalConfig, PlaneWaveState, PulseEnvelope, max_workers,
                            q_from_potential, to_reduced)


def test_physical_config_from_atom_is_consistent():
    k = 2 * math.pi / 589e-9
    m = 23 * 1.6605390666e-27
    cfg = PhysicalConfig.from_atom(k, m)
    assert cfg.recoil_angular_frequency == pytest.approx(HBAR * k**2 / (2 * m), rel=1e-15)


def test_physical_config_rejects_inconsistent_recoil():
    with pytest.raises(ValueError):
        PhysicalConfig(1.0, laser_wavevector=1e7, atomic_mass=1e-26)
    with pytest.raises(ValueError):
        PhysicalConfig(-1.0)


def test_to_reduced():
    cfg = PhysicalConfig(2.0e5)
    assert to_reduced(cfg, 1e-5) == pytest.approx(2.0)
    for bad in (-1e-6, math.inf, math.nan):
        with pytest.raises(ValueError):
            to_reduced(cfg, bad)


def test_q_from_potential():
    assert q_from_potential(4.0) == 1.0
    with pytest.raises(ValueError):
        q_from_potential(-1.0)


def test_max_workers_env(monkeypatch):
    monkeypatch.setenv("MATTERSIM_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("MATTERSIM_THREADS", "zero")
    with pytest.raises(ValueError):
        max_workers()


class TestEnvelope:
    def test_rectangular_values(self):
        env = PulseEnvelope.rectangular(2.0, 1.0, 3.0)
        np.testing.assert_array_equal(env(np.array([0.5, 1.0, 2.0, 3.0, 3.5])),
                                      [0, 2, 2, 2, 0])
        assert env.duration == 2.0

    def test_gaussian_truncated_at_five_sigma(self):
        env = PulseEnvelope.gaussian(1.5, 10.0, 0.4)
        assert env.tau_start == pytest.approx(8.0)
        assert env.tau_end == pytest.approx(12.0)
        assert env(10.0) == 1.5
        assert env(10.4) == pytest.approx(1.5 * math.exp(-0.5))
        assert env(12.01) == 0.0

    def test_tabulated_interpolates(self):
        env = PulseEnvelope.tabulated([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        assert env.q_max == 1.0
        assert env(0.5) == pytest.approx(0.5)
        assert env(-0.1) == 0.0

    def test_scaled_and_shifted(self):
        env = PulseEnvelope.gaussian(1.0, 0.0, 1.0)
        assert env.scaled(1.1).q_max == pytest.approx(1.1)
        assert env.shifted(2.0)(2.0) == 1.0
        tab = PulseEnvelope.tabulated([0.0, 1.0], [1.0, 2.0]).scaled(2.0)
        assert tab.q_max == 4.0

    def test_off(self):
        assert PulseEnvelope.off().is_off

    @pytest.mark.parametrize("args", [
        ("square", 1.0, 0.0, 1.0),
        ("rectangular", -1.0, 0.0, 1.0),
        ("rectangular", 1.0, 2.0, 1.0),
    ])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            PulseEnvelope(*args)

    def test_tabulated_needs_increasing_times(self):
        with pytest.raises(ValueError):
            PulseEnvelope.tabulated([0.0, 0.0, 1.0], [0.0, 1.0, 0.0])


class TestPlaneWaveState:
    def test_basis(self):
        s = PlaneWaveState.basis(1)
        assert s.amplitude(1) == 1.0
        assert s.p_min == -1 and s.p_max == 1
        np.testing.assert_array_equal(s.momenta, [-2.0, 0.0, 2.0])

    def test_immutable(self):
        s = PlaneWaveState.basis(0)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0

    def test_requires_normalization(self):
        with pytest.raises(ValueError):
            PlaneWaveState(0.0, 0, [0.5])

    def test_requires_p_zero_in_range(self):
        with pytest.raises(ValueError):
            PlaneWaveState(0.0, 1, [1.0])

    def test_kappa_range(self):
        PlaneWaveState(1.0, 0, [1.0])
        with pytest.raises(ValueError):
            PlaneWaveState(-1.0, 0, [1.0])

    def test_padded_and_from_orders(self):
        s = PlaneWaveState.from_orders({2: 1.0, -1: 1.0j}, normalize=True)
        assert s.p_min == -1 and s.p_max == 2
        assert s.norm == pytest.approx(1.0)
        big = s.padded(-3, 4)
        assert big.amplitude(2) == s.amplitude(2)
        assert big.amplitude(-3) == 0
        with pytest.raises(ValueError):
            s.padded(0, 4)
