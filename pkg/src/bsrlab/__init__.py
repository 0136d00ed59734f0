"""Boundary-spectral-data reconstruction laboratory on the unit ball in R^3.

Forward Robin eigenproblem for radial potentials, geometric-optics probes,
series recovery of the Fourier transform of a potential difference, truncated
Fourier inversion, and numerical checks of oscillatory boundary integrals.

Set ``BSRLAB_DISABLE_NUMBA=1`` before import to run the pure-numpy kernels.
"""
__version__ = "0.1.0"

from ._accel import USE_NUMBA
from .errors import (BsrlabError, CapError, ConfigError, DivergenceError, DomainError,
                     InvalidArgument, MissingTraceError, NumericError, PairingError,
                     ResolutionError, SchemaError, ValidationError)
from .sphere import (BoundaryFunction, HarmonicIndex, SphereQuadrature, StationaryPointSet,
                     build_quadrature, c_s_constant, eval_harmonic, hs_norm, stationary_points)
from .spectral import (BoundarySpectralData, PerturbationSpec, SpectralEntry, drop_traces,
                       load_bsd, perturb_eigenvalues, save_bsd, scale_traces, validate_bsd)
from .radial import (RadialMode, RadialPotential, RobinCoefficient, assemble_bsd,
                     check_incomplete_data_conditions, solve_radial_modes)
from .probe import FrequencyProbe, GoTrace, go_trace, make_probe, pairing_dn, pairing_group_sum
from .reconstruction import (FourierField, RhoHatEstimate, SeriesEvaluation, fourier_oracle_radial,
                             h_minus1_norm, reconstruct_field, rho_hat_at, s_star_series,
                             tail_bound, u_series_norm)
from .oscillatory import (OscillatoryReport, boundary_oscillatory_integral, finite_sum_decay,
                          pairing_uniform_bound, vdc_decay_report)
from .experiments import SweepResult, incomplete_sweep, reference_pair, stability_sweep
