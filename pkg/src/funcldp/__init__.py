"""Functional Nadaraya-Watson regression, its large-deviation rate
functions, and seeded Monte Carlo checks of the limit theorems."""
from ._backend import BACKEND
from .covering import CoveringReport, estimate_alpha, greedy_net
from .estimator import EstimateResult, nw_estimate, sup_deviation
from .func_core import (
    Curve,
    DataSet,
    DesignConfig,
    RadialLaw,
    RegressionModel,
    SemiMetricSpec,
    drift_varphi,
    eval_regression,
    generate_radial_dataset,
    semi_metric_distance,
)
from .kernels import EXP_DECAY, LINEAR_DECAY, KernelSpec, kernel_deriv, kernel_eval, validate_kernel
from .ldpsim import ExperimentConfig, exact_finite_n_logmgf, mgf_check, simulate_pointwise, simulate_uniform
from .ratefn import RateQuadrature, RateReport, g_uniform, gamma, rate_I, rate_I_ibp
from .smallball import SmallBallModel, fit_fractal_exponent, phi, zeta0

__version__ = "0.1.0"
