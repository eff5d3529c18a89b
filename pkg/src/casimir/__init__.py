"""Casimir pressure between two plane mirrors with frequency-dependent reflection.

The public entry points are re-exported here; see the submodules for
details: :mod:`casimir.materials` (dielectric models and reflection
amplitudes), :mod:`casimir.cavity` (loop functions), :mod:`casimir.quad`
(quadrature and series engine) and :mod:`casimir.forces` (pressure
evaluators).
"""
from .cavity import CavityConfig, TransverseMode, mode_density
from .constants import CODATA, Constants
from .errors import (CasimirError, ConfigError, DomainError, FormatError,
                     InsufficientDataError, UnsupportedModelError, ValidityError)
from .forces import (Evaluator, PressureReport, ThermalState, default_eta,
                     poisson_residual, pressure_exp_series, pressure_matsubara,
                     pressure_perfect_closed_form, pressure_real_axis,
                     pressure_zero_temperature, te_m0_term, thermal_weight)
from .materials import (Bulk, Drude, Perfect, Plasma, Polarization, PrescribedAmplitude,
                        Tabulated, Vacuum, epsilon_imaginary, epsilon_real,
                        ingest_tabulated, reflection_imaginary, reflection_real)
from .quad import NumericResult, Tolerance

__version__ = "0.1.0"
