"""Adaptive goodness-of-fit testing and plug-in estimation in deconvolution models.

Observations ``Y = X + noise`` are available; the noise law is known up to
its stable index.  The package provides the Fourier-domain quadratic
U-statistics, the adaptive tests built on them, the stable-index estimator
with its plug-in density and functional estimators, and tools to study the
normal approximation of degenerate U-statistics.
"""

from .adaptive import (AdaptiveGrid, GridBounds, TestOutcome, build_grid, calibrate_cstar, cstar_from_pool,
                       run_test_poly, run_test_stable)
from .errors import (DeconvError, DivergenceError, KernelOverflowError, NTooSmall, NumericalError, OracleMisuse,
                     OrderingError, ParameterError, QuadratureError)
from .fourier import QuadratureSpec, ecf, exp_sum_grid, parseval_inner, tail_energy
from .harness import ExperimentConfig, run_experiment
from .kernels import (GridPoint, KernelCF, bandwidth_semiparam, bandwidth_threshold_thm1,
                      bandwidth_threshold_thm2_supersmooth, kernel_poly, kernel_stable, testing_rate,
                      threshold_semiparam)
from .model import (Cauchy, Gaussian, Laplace, Mixture, PointMass, PolynomialNoise, Sample, SmoothnessClass,
                    StableNoise, SymmetrizedGamma, class_membership_integral, load_sample, sample_convolution,
                    save_sample)
from .quadstat import QuadStatResult, quad_stat, quad_stat_xdomain_oracle
from .semiparam import (PluginEstimate, density_given_s, estimate_density_at, estimate_quadratic_functional,
                        functional_given_s)
from .stable_index import (StableIndexParams, build_s_grid, classify_pipe, estimate_s, estimate_s_oracle,
                           frequency_u_n, grid_oracle_index)
from .ustat import berry_esseen_bound, cdf_discrepancy_experiment, ustat_decompose

__version__ = "0.1.0"
