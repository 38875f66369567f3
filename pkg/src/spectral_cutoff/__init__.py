"""Adaptive spectral cut-off estimation for periodic deconvolution.

Observations y_i = g(i/n) + sigma * eps_i with g = R*f; in the trigonometric
basis the convolution acts diagonally, f has coefficients c(k) w(k), and f
is estimated by a truncated series whose cutoff is chosen from the data.
"""
from ._kernels import BACKEND
from .basis import (UniformGrid, design_matrix, empirical_coefficients, eval_basis, frequency,
                    l2_distance_on_spectrum, raw_coefficients, synthesize)
from .errors import (ConfigError, DomainError, InputError, ModelError, PreconditionError,
                     RangeError)
from .estimators import (AdaptiveSelection, EstimateReport, adaptive_estimate, estimate_gamma,
                         gamma_block, plug_in_comparison, projection_estimate, select_adaptive,
                         select_adaptive_p, select_penalized, select_unweighted, tau, tau_curve)
from .inference import (ConfidenceRegion, EnergyEstimate, energy_ci, energy_ci_fisher,
                        energy_estimate, fisher_statistic, function_ci, function_ci_rough,
                        function_ci_tail)
from .signal import (N_plus, SignalSpectrum, b_norm_sq, energy, gamma_limit, oracle_risk, rho,
                     rho2)
from .simulate import NoiseModel, ObservationSet, estimate_sigma, forward, observe
from .spectrum import S, S2, Gamma_limit, ModularNorm, WeightSequence, modular_norm_sq

__version__ = "0.1.0"
