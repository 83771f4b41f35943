"""Pitman-nearness comparison of estimators for order-restricted bivariate
location and scale parameters.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    KindMismatchError,
    PitnearError,
    UnknownEstimatorError,
    UnsupportedCaseError,
)
from .estimators import (
    ClampBounds,
    Estimator,
    LossFn,
    LossKind,
    beta_weight,
    catalog,
    clamp_location,
    clamp_scale,
    default_bounds,
    estimator_names,
    normal_nu_family,
    resolve_estimator,
)
from .gpn import (
    LOCATION_DOMINANCE_GAPS,
    SCALE_DOMINANCE_GAPS,
    ComparisonTask,
    GpnResult,
    SweepCell,
    derive_cell_seed,
    gpn_monte_carlo,
    gpn_oracle,
    gpn_sweep,
)
from .models import (
    BivariateNormal,
    ExponentialLocation,
    GammaScale,
    ModelSpec,
    Observation,
    PowerScale,
    ProblemKind,
    RestrictedParams,
    model_from_config,
)
from .specfun import (
    Precision,
    gamma_median,
    gammaln,
    normal_cdf,
    normal_quantile,
    regularized_gamma_p,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateNormal",
    "ClampBounds",
    "ComparisonTask",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "Estimator",
    "ExponentialLocation",
    "GammaScale",
    "GpnResult",
    "KindMismatchError",
    "LOCATION_DOMINANCE_GAPS",
    "LossFn",
    "LossKind",
    "ModelSpec",
    "Observation",
    "PitnearError",
    "PowerScale",
    "Precision",
    "ProblemKind",
    "RestrictedParams",
    "SCALE_DOMINANCE_GAPS",
    "SweepCell",
    "UnknownEstimatorError",
    "UnsupportedCaseError",
    "beta_weight",
    "catalog",
    "clamp_location",
    "clamp_scale",
    "default_bounds",
    "derive_cell_seed",
    "estimator_names",
    "gamma_median",
    "gammaln",
    "gpn_monte_carlo",
    "gpn_oracle",
    "gpn_sweep",
    "model_from_config",
    "normal_cdf",
    "normal_nu_family",
    "normal_quantile",
    "regularized_gamma_p",
    "resolve_estimator",
]
