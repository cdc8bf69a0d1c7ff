"""Multilinear pseudo-differential operators with S_{0,0} symbols on periodic grids:
dyadic and uniform windows, Besov / local Hardy / Wiener amalgam norms, the
operator and its lattice expansion, extremal constructions and experiments."""

from .errors import (ComputationError, ConfigurationError, ContractError, CostGuardError,
                     CoverageError, EvaluationError, FitError, MultipdoError, ResolutionError,
                     ValidationError)
from .exponents import (ExponentProfile, LebesgueExponent, check_smoothness_conditions,
                        critical_order, exponent_functionals, parse_exponent)
from .experiments import (ExperimentReport, fit_slope, run_band_decay, run_embedding_suite,
                          run_keyprop_ratio, run_sharpness_s, run_sharpness_sj,
                          run_wainger_threshold)
from .extremal import (LatticeSetD, WaingerParams, coefficient_sum, enumerate_D, make_wainger,
                       rademacher_sample, wainger_threshold)
from .grid import GridFunction, GridSpec, apply_multiplier, band_project, box_project, transform
from .operator import (apply_direct, apply_via_expansion, coefficient_band_decay, decompose_symbol,
                       make_plan, symbol_fourier_coefficients)
from .partitions import make_lp_family, make_uniform_window, smooth_step, verify_partition
from .spaces import (besov_norm, bmo_norm, local_hardy_norm, lp_norm, lq_norm, wiener_amalgam_norm)
from .symbols import (Symbol, make_sharpness_symbol, make_test_symbol, seminorm_estimate,
                      symbol_from_config)

__version__ = "0.1.0"
