"""Diffraction phases of atomic matter waves in a standing light wave."""
from .analytic import (BraggEffectiveModel, bessel_j, bessel_j_orders, bragg_apply,
                       design_pi_pulse, effective_two_level, pi_pulse, rabi_phase,
                       raman_nath_state, raman_nath_validity_bound)
from .bloch import (BandStructure, TridiagonalHamiltonian, band_structure, build_hamiltonian,
                    eigensystem, ground_energy_shift, tridiagonal_eigh)
from .core import (ConvergenceError, DegenerateFitError, OutOfValidityWarning,
                   PhysicalConfig, PlaneWaveState, PulseEnvelope, envelope_value,
                   q_from_potential, to_reduced)
from .interferometer import (InterferometerConfig, SensitivityResult, SignalTrace,
                             bragg_pi_pulse, extract_phase, grating_amplitude, mit_2002,
                             power_sensitivity, simulate)
from .propagator import (PropagationReport, PropagationSettings, diffraction_spectrum,
                         free_propagate, propagate)

__version__ = "0.1.0"
