import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from mattersim.analytic import (bessel_j, bessel_j_orders, bragg_apply, design_pi_pulse,
                                effective_two_level, pi_pulse, rabi_phase, raman_nath_state,
                                raman_nath_validity_bound)
from mattersim.core import (GAUSSIAN, RECTANGULAR, TABULATED, OutOfValidityWarning,
                            PlaneWaveState, PulseEnvelope)


@given(st.integers(0, 64), st.floats(0.0, 64.0))
@settings(max_examples=200, deadline=None)
def test_bessel_matches_scipy(n, x):
    assert bessel_j(n, x) == pytest.approx(special.jv(n, x), abs=1e-12)


# orders above 64 carry < 1e-15 of the weight for x <= 40
@given(st.floats(0.0, 40.0))
@settings(max_examples=100, deadline=None)
def test_bessel_normalization_identity(x):
    j = bessel_j_orders(64, x)
    assert abs(j[0] ** 2 + 2 * np.sum(j[1:] ** 2) - 1.0) <= 1e-9


def test_bessel_domain():
    for args in ((65, 1.0), (2, 65.0), (-1, 1.0), (2, -0.5), (1.5, 1.0)):
        with pytest.raises(ValueError):
            bessel_j(*args)


def test_bessel_at_zero():
    np.testing.assert_array_equal(bessel_j_orders(3, 0.0), [1, 0, 0, 0])


def test_splitting_pulse_amplitudes():
    # gamma = 1.17 leaves ~47 % in the central order
    assert bessel_j(0, 1.17) ** 2 == pytest.approx(0.4705, abs=5e-4)
    assert bessel_j(2, 1.17) == pytest.approx(0.1524, abs=5e-4)


class TestRamanNath:
    def test_amplitudes(self):
        s = raman_nath_state(0.2)
        for p in range(-3, 4):
            expected = (-1j) ** abs(p) * special.jv(abs(p), 0.2)
            assert s.amplitude(p) == pytest.approx(expected, abs=1e-14)

    def test_normalized_and_symmetric(self):
        s = raman_nath_state(3.0)
        assert s.norm == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(s.amplitudes, s.amplitudes[::-1], atol=1e-15)

    def test_span_too_small(self):
        with pytest.raises(ValueError):
            raman_nath_state(3.0, p_span=2)

    def test_zero_area(self):
        s = raman_nath_state(0.0)
        assert s.amplitude(0) == 1.0

    def test_validity_bound(self):
        assert raman_nath_validity_bound(3.7) == pytest.approx(0.12997, abs=1e-5)
        with pytest.raises(ValueError):
            raman_nath_validity_bound(0.0)


class TestRabiPhase:
    def test_rectangular(self):
        assert rabi_phase(PulseEnvelope.rectangular(0.2, 1.0, 3.0)) == pytest.approx(0.04)

    def test_gaussian_against_quadrature(self):
        env = PulseEnvelope.gaussian(1.3, 2.0, 0.7)
        ref, _ = integrate.quad(lambda t: env(t) ** 2 / 2, env.tau_start, env.tau_end,
                                epsabs=1e-13)
        assert rabi_phase(env) == pytest.approx(ref, rel=1e-10)

    def test_tabulated_against_quadrature(self):
        env = PulseEnvelope.tabulated([0.0, 0.3, 1.1, 2.0], [0.0, 1.2, 0.7, 0.1])
        ref, _ = integrate.quad(lambda t: env(t) ** 2 / 2, 0.0, 2.0,
                                points=[0.3, 1.1], epsabs=1e-13)
        assert rabi_phase(env) == pytest.approx(ref, rel=1e-10)

    def test_off(self):
        assert rabi_phase(PulseEnvelope.off()) == 0.0


class TestDesign:
    def test_rectangular(self):
        q = design_pi_pulse(RECTANGULAR, 10.0)
        assert rabi_phase(PulseEnvelope.rectangular(q, 0, 10.0)) == pytest.approx(math.pi)

    def test_gaussian(self):
        q = design_pi_pulse(GAUSSIAN, 0.6)
        assert q == pytest.approx(2.43067, abs=1e-5)
        assert rabi_phase(PulseEnvelope.gaussian(q, 0.0, 0.6)) == pytest.approx(math.pi, abs=1e-12)

    def test_tabulated(self):
        tpl = PulseEnvelope.tabulated([0.0, 1.0, 2.0, 4.0], [0.0, 0.5, 0.5, 0.0])
        q = design_pi_pulse(TABULATED, template=tpl)
        assert rabi_phase(tpl.scaled(q / tpl.q_max)) == pytest.approx(math.pi, abs=1e-10)

    def test_errors(self):
        with pytest.raises(ValueError):
            design_pi_pulse(RECTANGULAR, 0.0)
        with pytest.raises(ValueError):
            design_pi_pulse(TABULATED)
        with pytest.raises(ValueError):
            design_pi_pulse("triangle", 1.0)

    def test_pi_pulse_centering(self):
        env = pi_pulse(RECTANGULAR, 4.0, center=10.0)
        assert (env.tau_start, env.tau_end) == (8.0, 12.0)


class TestBragg:
    def test_effective_model(self):
        m = effective_two_level(0.2)
        assert m.e0_shift == pytest.approx(-0.02)
        assert m.diag == pytest.approx(4 + 0.04 / 6)
        assert m.splitting == pytest.approx(0.02)
        np.testing.assert_allclose(m.matrix, m.matrix.T)

    def test_effective_model_warns_out_of_range(self):
        with pytest.warns(OutOfValidityWarning):
            effective_two_level(1.5)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            effective_two_level(0.9)

    def test_pi_pulse_phases(self):
        env = pi_pulse(RECTANGULAR, 2 * math.pi / 0.2**2)
        dt = env.duration
        out0 = bragg_apply(PlaneWaveState.basis(0), env)
        assert np.angle(out0.amplitude(0)) == pytest.approx(math.pi, abs=1e-12)
        outp = bragg_apply(PlaneWaveState.basis(1), env)
        assert abs(outp.amplitude(-1)) == pytest.approx(1.0)
        phase = np.angle(outp.amplitude(-1) * np.exp(4j * dt))
        assert phase == pytest.approx(-5 * math.pi / 6, abs=1e-12)

    @given(st.floats(0.0, 3.0), st.complex_numbers(max_magnitude=1),
           st.complex_numbers(max_magnitude=1), st.complex_numbers(max_magnitude=1))
    @settings(max_examples=50, deadline=None)
    def test_unitary(self, q, a, b, c):
        amps = np.array([a, b, c])
        if np.linalg.norm(amps) < 1e-3:
            return
        state = PlaneWaveState(0.0, -1, amps / np.linalg.norm(amps))
        out = bragg_apply(state, PulseEnvelope.rectangular(q, 0.0, 5.0))
        assert out.norm == pytest.approx(1.0, abs=1e-12)

    def test_composition_of_two_half_pulses(self):
        half = pi_pulse(RECTANGULAR, 50.0).scaled(math.sqrt(0.5))
        full = pi_pulse(RECTANGULAR, 50.0)
        s = raman_nath_state(1.0, p_span=8)
        s3 = PlaneWaveState.from_orders({p: s.amplitude(p) for p in (-1, 0, 1)}, normalize=True)
        twice = bragg_apply(bragg_apply(s3, half.shifted(0.0)), half)
        # two half-area pulses of the same length give the full rotation and double phases
        once_long = bragg_apply(s3, PulseEnvelope.rectangular(half.q_max, 0.0, 100.0))
        np.testing.assert_allclose(twice.amplitudes, once_long.amplitudes, atol=1e-12)
        assert rabi_phase(full) == pytest.approx(2 * rabi_phase(half))

    def test_symmetric_input_closed_form(self):
        env = PulseEnvelope.rectangular(0.3, 0.0, 20.0)
        phi = rabi_phase(env)
        amps = np.array([1, 0, 1]) / math.sqrt(2)
        out = bragg_apply(PlaneWaveState(0.0, -1, amps), env)
        expected = np.exp(-1j * (4 * 20.0 + phi / 3)) * np.exp(-1j * phi / 2) / math.sqrt(2)
        assert out.amplitude(1) == pytest.approx(expected, abs=1e-12)

    def test_rejects_population_outside_three_orders(self):
        with pytest.raises(ValueError):
            bragg_apply(raman_nath_state(1.0), PulseEnvelope.rectangular(0.2, 0, 1))

    def test_rejects_nonzero_kappa(self):
        with pytest.raises(ValueError):
            bragg_apply(PlaneWaveState.basis(0, kappa=0.1), PulseEnvelope.rectangular(0.2, 0, 1))


@pytest.mark.parametrize("x", [1e-300, 1e-10, 2.404825557695773, 5.520078110286311])
def test_bessel_tiny_argument_and_near_zeros(x):
    np.testing.assert_allclose(bessel_j_orders(10, x), special.jv(np.arange(11), x), atol=1e-14)
