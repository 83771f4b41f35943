"""The four bivariate models: sampling, the conditional law of the pivot
given the contrast statistic, and the density of the contrast itself.

Each model is an immutable spec. Location models use the contrast
D = X2 - X1 with gap parameter lam = theta2 - theta1 >= 0; scale models use
D = X2 / X1 with lam = theta2 / theta1 >= 1. All evaluation methods accept
scalars or ndarrays and are pure; sampling takes a caller-owned numpy
Generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import ConfigError, DomainError
from .quadrature import adaptive_quadrature
from .specfun import gamma_median, gammaln, normal_cdf, regularized_gamma_p

__all__ = [
    "ProblemKind",
    "Observation",
    "RestrictedParams",
    "QuadSegment",
    "BivariateNormal",
    "ExponentialLocation",
    "GammaScale",
    "PowerScale",
    "ModelSpec",
    "model_from_config",
]

_LN2 = math.log(2.0)


class ProblemKind(Enum):
    LOCATION = "location"
    SCALE = "scale"


class Observation(NamedTuple):
    x1: Union[float, np.ndarray]
    x2: Union[float, np.ndarray]


@dataclass(frozen=True)
class RestrictedParams:
    """An ordered parameter pair theta1 <= theta2."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not self.theta1 <= self.theta2:
            raise DomainError(
                f"requires theta1 <= theta2, got ({self.theta1}, {self.theta2})"
            )

    def gap(self, kind: ProblemKind) -> float:
        if kind is ProblemKind.LOCATION:
            return self.theta2 - self.theta1
        if not self.theta1 > 0.0:
            raise DomainError(f"scale parameters must be positive, got {self.theta1}")
        return self.theta2 / self.theta1

    def component(self, index: int) -> float:
        if index == 1:
            return self.theta1
        if index == 2:
            return self.theta2
        raise DomainError(f"component must be 1 or 2, got {index}")


@dataclass(frozen=True)
class QuadSegment:
    """One finite piece of the contrast support under a change of variable.

    Maps s in (lo, hi) to t = to_t(s) with dt = jacobian(s) ds; from_t places
    t-space breakpoints inside the segment.
    """

    lo: float
    hi: float
    to_t: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    from_t: Callable[[float], float]


def _identity_segment(lo: float, hi: float) -> QuadSegment:
    return QuadSegment(lo, hi, lambda s: s, lambda s: np.ones_like(s), lambda t: t)


# Keeps compactified endpoints off exact 0; at this floor the upper-branch
# jacobian lam/v^2 stays finite (~1e240) and the discarded tail mass is below
# floor^shape, negligible for every supported shape.
_SEG_FLOOR = 1e-120


def _ratio_segments(lam: float) -> list[QuadSegment]:
    """Full-support segments for a ratio contrast D > 0, split at t = lam."""

    def to_t_lower(s):
        return lam * np.clip(s, _SEG_FLOOR, None)

    def to_t_upper(v):
        return lam / np.clip(v, _SEG_FLOOR, None)

    def jac_upper(v):
        v = np.clip(v, _SEG_FLOOR, None)
        return lam / (v * v)

    return [
        QuadSegment(0.0, 1.0, to_t_lower, lambda s: lam * np.ones_like(s),
                    lambda t: t / lam),
        QuadSegment(0.0, 1.0, to_t_upper, jac_upper, lambda t: lam / t),
    ]


def _check_component(component: int) -> None:
    if component not in (1, 2):
        raise DomainError(f"component must be 1 or 2, got {component}")


def _as_float_or_array(x, scalar: bool):
    return float(x) if scalar else x


class _ModelBase:
    kind: ProblemKind

    def _check_lambda(self, lam: float) -> None:
        if self.kind is ProblemKind.LOCATION:
            if not lam >= 0.0:
                raise DomainError(f"location gap must be >= 0, got {lam}")
        else:
            if not lam >= 1.0:
                raise DomainError(f"scale gap must be >= 1, got {lam}")

    def _check_t(self, t) -> None:
        if self.kind is ProblemKind.SCALE and not np.all(np.asarray(t) > 0.0):
            raise DomainError("contrast ratio t must be positive for scale models")

    def check_params(self, params: RestrictedParams) -> None:
        params.gap(self.kind)  # raises on a non-positive scale theta

    def d_density_integral(self, lam: float, t: float, rel_tol: float = 1e-9) -> float:
        """Contrast density at t evaluated from its defining one-dimensional
        integral by adaptive quadrature (reference path for the closed form).
        """
        self._check_lambda(lam)
        self._check_t(t)
        lo, hi, integrand = self._d_integrand(lam, float(t))
        return adaptive_quadrature(
            integrand, lo, hi, abs_tol=0.0, rel_tol=rel_tol, max_panels=4000
        )


# ---------------------------------------------------------------------------
# bivariate normal (location)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateNormal(_ModelBase):
    """Correlated normal pair with known scales and correlation; the two
    means are the restricted parameters.
    """

    sigma1: float
    sigma2: float
    rho: float

    kind = ProblemKind.LOCATION

    def __post_init__(self):
        if not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
            raise DomainError("sigma1 and sigma2 must be positive")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.tau2 > 0.0:
            raise DomainError("degenerate contrast variance")

    @property
    def tau2(self) -> float:
        return (
            self.sigma1 ** 2
            + self.sigma2 ** 2
            - 2.0 * self.rho * self.sigma1 * self.sigma2
        )

    @property
    def alpha(self) -> float:
        return self.sigma2 * (self.sigma2 - self.rho * self.sigma1) / self.tau2

    @property
    def cond_sd(self) -> float:
        # conditional variance of either pivot given D is (1-rho^2) s1^2 s2^2 / tau^2
        return math.sqrt(
            (1.0 - self.rho ** 2) * self.sigma1 ** 2 * self.sigma2 ** 2 / self.tau2
        )

    def sample(self, params: RestrictedParams, rng: np.random.Generator, size=None):
        self.check_params(params)
        z1 = rng.standard_normal(size)
        z2 = rng.standard_normal(size)
        # Cholesky factor of the 2x2 covariance applied to (z1, z2)
        x1 = params.theta1 + self.sigma1 * z1
        x2 = params.theta2 + self.sigma2 * (
            self.rho * z1 + math.sqrt(1.0 - self.rho ** 2) * z2
        )
        return Observation(x1, x2)

    def cond_median(self, component: int, lam: float, t):
        _check_component(component)
        self._check_lambda(lam)
        t = np.asarray(t, dtype=float)
        if component == 1:
            m = (1.0 - self.alpha) * (lam - t)
        else:
            m = self.alpha * (t - lam)
        return _as_float_or_array(m, t.ndim == 0)

    def cond_cdf(self, component: int, lam: float, t, s):
        m = self.cond_median(component, lam, t)
        z = (np.asarray(s, dtype=float) - m) / self.cond_sd
        return normal_cdf(z)

    def d_density(self, lam: float, t):
        self._check_lambda(lam)
        t = np.asarray(t, dtype=float)
        out = np.exp(-0.5 * (t - lam) ** 2 / self.tau2) / math.sqrt(
            2.0 * math.pi * self.tau2
        )
        return _as_float_or_array(out, t.ndim == 0)

    def _joint_pdf(self, z1, z2):
        s1, s2, rho = self.sigma1, self.sigma2, self.rho
        q = (
            (z1 / s1) ** 2
            - 2.0 * rho * z1 * z2 / (s1 * s2)
            + (z2 / s2) ** 2
        ) / (1.0 - rho ** 2)
        return np.exp(-0.5 * q) / (2.0 * math.pi * s1 * s2 * math.sqrt(1.0 - rho ** 2))

    def _d_integrand(self, lam: float, t: float):
        c = t - lam
        center = -(1.0 - self.alpha) * c
        width = 12.0 * self.cond_sd
        return center - width, center + width, lambda y: self._joint_pdf(y, y + c)

    def d_quadrature_segments(self, lam: float) -> list[QuadSegment]:
        tau = math.sqrt(self.tau2)
        return [_identity_segment(lam - 12.0 * tau, lam + 12.0 * tau)]


# ---------------------------------------------------------------------------
# independent shifted exponentials (location)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialLocation(_ModelBase):
    """Independent exponentials with known scales; the two shifts are the
    restricted parameters.
    """

    sigma1: float
    sigma2: float

    kind = ProblemKind.LOCATION

    def __post_init__(self):
        if not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
            raise DomainError("sigma1 and sigma2 must be positive")

    @property
    def rate(self) -> float:
        return 1.0 / self.sigma1 + 1.0 / self.sigma2

    @property
    def pooled_scale(self) -> float:
        # sigma1 sigma2 / (sigma1 + sigma2), the conditional pivot scale
        return self.sigma1 * self.sigma2 / (self.sigma1 + self.sigma2)

    def sample(self, params: RestrictedParams, rng: np.random.Generator, size=None):
        self.check_params(params)
        u1 = rng.random(size)
        u2 = rng.random(size)
        x1 = params.theta1 - self.sigma1 * np.log1p(-u1)
        x2 = params.theta2 - self.sigma2 * np.log1p(-u2)
        return Observation(x1, x2)

    def _shift(self, component: int, lam: float, t):
        if component == 1:
            return np.maximum(lam - t, 0.0)
        return np.maximum(t - lam, 0.0)

    def cond_median(self, component: int, lam: float, t):
        _check_component(component)
        self._check_lambda(lam)
        t = np.asarray(t, dtype=float)
        m = self._shift(component, lam, t) + self.pooled_scale * _LN2
        return _as_float_or_array(m, t.ndim == 0)

    def cond_cdf(self, component: int, lam: float, t, s):
        _check_component(component)
        self._check_lambda(lam)
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        shift = self._shift(component, lam, t)
        out = -np.expm1(-self.rate * np.maximum(s - shift, 0.0))
        return _as_float_or_array(out, out.ndim == 0)

    def d_density(self, lam: float, t):
        self._check_lambda(lam)
        t = np.asarray(t, dtype=float)
        norm = 1.0 / (self.sigma1 + self.sigma2)
        out = norm * np.where(
            t >= lam,
            np.exp(-(t - lam) / self.sigma2),
            np.exp(-(lam - t) / self.sigma1),
        )
        return _as_float_or_array(out, t.ndim == 0)

    def _d_integrand(self, lam: float, t: float):
        c = t - lam
        y0 = max(-c, 0.0)
        norm = 1.0 / (self.sigma1 * self.sigma2)

        def integrand(y):
            z2 = y + c
            good = (y >= y0) & (z2 >= 0.0)
            val = norm * np.exp(-y / self.sigma1 - np.maximum(z2, 0.0) / self.sigma2)
            return np.where(good, val, 0.0)

        return y0, y0 + 50.0 / self.rate, integrand

    def d_quadrature_segments(self, lam: float) -> list[QuadSegment]:
        return [
            _identity_segment(lam - 45.0 * self.sigma1, lam),
            _identity_segment(lam, lam + 45.0 * self.sigma2),
        ]


# ---------------------------------------------------------------------------
# independent gammas (scale)
# ---------------------------------------------------------------------------


def _gamma_marsaglia_tsang(
    rng: np.random.Generator, shape: float, size
) -> np.ndarray:
    """Gamma(shape, 1) variates; for shape < 1 draws at shape + 1 and applies
    the U^(1/shape) boost.
    """
    n = 1 if size is None else int(size)
    if shape < 1.0:
        g = _gamma_marsaglia_tsang(rng, shape + 1.0, n)
        u = rng.random(n)
        out = g * u ** (1.0 / shape)
        return out
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        k = pending.size
        x = rng.standard_normal(k)
        u = rng.random(k)
        v = (1.0 + c * x) ** 3
        pos = v > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = pos & (
                np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(np.where(pos, v, 1.0)))
            )
        out[pending[accept]] = d * v[accept]
        pending = pending[~accept]
    return out


@dataclass(frozen=True)
class GammaScale(_ModelBase):
    """Independent gammas with known shapes; the two scales are the
    restricted parameters.
    """

    alpha1: float
    alpha2: float

    kind = ProblemKind.SCALE

    def __post_init__(self):
        if not (self.alpha1 > 0.0 and self.alpha2 > 0.0):
            raise DomainError("alpha1 and alpha2 must be positive")

    @cached_property
    def pooled_median(self) -> float:
        return gamma_median(self.alpha1 + self.alpha2)

    @cached_property
    def _log_beta(self) -> float:
        return (
            gammaln(self.alpha1)
            + gammaln(self.alpha2)
            - gammaln(self.alpha1 + self.alpha2)
        )

    def sample(self, params: RestrictedParams, rng: np.random.Generator, size=None):
        self.check_params(params)
        z1 = _gamma_marsaglia_tsang(rng, self.alpha1, size)
        z2 = _gamma_marsaglia_tsang(rng, self.alpha2, size)
        if size is None:
            z1, z2 = float(z1[0]), float(z2[0])
        return Observation(params.theta1 * z1, params.theta2 * z2)

    def cond_median(self, component: int, lam: float, t):
        _check_component(component)
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        nu = self.pooled_median
        if component == 1:
            m = lam * nu / (lam + t)
        else:
            m = t * nu / (lam + t)
        return _as_float_or_array(m, t.ndim == 0)

    def _cond_rate(self, component: int, lam: float, t):
        return 1.0 + t / lam if component == 1 else 1.0 + lam / t

    def cond_cdf(self, component: int, lam: float, t, s):
        _check_component(component)
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        rate = self._cond_rate(component, lam, t)
        x = np.maximum(rate * s, 0.0)
        out = regularized_gamma_p(self.alpha1 + self.alpha2, x)
        return _as_float_or_array(out, np.ndim(out) == 0)

    def _ratio_log_density(self, u: np.ndarray) -> np.ndarray:
        a1, a2 = self.alpha1, self.alpha2
        return (a2 - 1.0) * np.log(u) - (a1 + a2) * np.log1p(u) - self._log_beta

    def d_density(self, lam: float, t):
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        u = t / lam
        out = np.exp(self._ratio_log_density(u)) / lam
        return _as_float_or_array(out, t.ndim == 0)

    def _d_integrand(self, lam: float, t: float):
        a1, a2 = self.alpha1, self.alpha2
        lognorm = gammaln(a1) + gammaln(a2)
        rate = 1.0 + t / lam

        def integrand(y):
            y = np.maximum(y, 1e-300)
            logv = (
                (a1 + a2 - 1.0) * np.log(y)
                - rate * y
                + (a2 - 1.0) * math.log(t / lam)
                - math.log(lam)
                - lognorm
            )
            return np.exp(logv)

        mean = (a1 + a2) / rate
        sd = math.sqrt(a1 + a2) / rate
        return 0.0, mean + 40.0 * sd + 40.0 / rate, integrand

    def d_quadrature_segments(self, lam: float) -> list[QuadSegment]:
        # Ratio tails are power laws, so both ends are compactified toward 0
        # (where binary64 has dynamic range): t = lam*s below lam, t = lam/v
        # above. Density-threshold truncation would lose ~1e-3 of mass for
        # shapes as small as 0.2.
        return _ratio_segments(lam)


# ---------------------------------------------------------------------------
# independent power-family variables on (0, theta) (scale)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerScale(_ModelBase):
    """Independent power-law variables with known shapes on (0, 1) cores;
    the two scales are the restricted parameters.
    """

    alpha1: float
    alpha2: float

    kind = ProblemKind.SCALE

    def __post_init__(self):
        if not (self.alpha1 > 0.0 and self.alpha2 > 0.0):
            raise DomainError("alpha1 and alpha2 must be positive")

    @property
    def shape_sum(self) -> float:
        return self.alpha1 + self.alpha2

    def sample(self, params: RestrictedParams, rng: np.random.Generator, size=None):
        self.check_params(params)
        u1 = rng.random(size)
        u2 = rng.random(size)
        x1 = params.theta1 * u1 ** (1.0 / self.alpha1)
        x2 = params.theta2 * u2 ** (1.0 / self.alpha2)
        return Observation(x1, x2)

    def _s_max(self, component: int, lam: float, t):
        ratio = lam / t if component == 1 else t / lam
        return np.minimum(1.0, ratio)

    def cond_median(self, component: int, lam: float, t):
        _check_component(component)
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        m = 2.0 ** (-1.0 / self.shape_sum) * self._s_max(component, lam, t)
        return _as_float_or_array(m, t.ndim == 0)

    def cond_cdf(self, component: int, lam: float, t, s):
        _check_component(component)
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        frac = np.clip(s / self._s_max(component, lam, t), 0.0, 1.0)
        out = frac ** self.shape_sum
        return _as_float_or_array(out, out.ndim == 0)

    def _ratio_density(self, u: np.ndarray) -> np.ndarray:
        a1, a2 = self.alpha1, self.alpha2
        coef = a1 * a2 / (a1 + a2)
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            return coef * np.where(u <= 1.0, u ** (a2 - 1.0), u ** (-a1 - 1.0))

    def d_density(self, lam: float, t):
        self._check_lambda(lam)
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        out = self._ratio_density(t / lam) / lam
        return _as_float_or_array(out, t.ndim == 0)

    def _d_integrand(self, lam: float, t: float):
        a1, a2 = self.alpha1, self.alpha2
        hi = min(1.0, lam / t)

        def integrand(y):
            y = np.maximum(y, 1e-300)
            z2 = y * t / lam
            val = (a1 * a2 / lam) * y ** a1 * z2 ** (a2 - 1.0)
            return np.where((y < 1.0) & (z2 < 1.0), val, 0.0)

        return 0.0, hi, integrand

    def d_quadrature_segments(self, lam: float) -> list[QuadSegment]:
        return _ratio_segments(lam)


ModelSpec = Union[BivariateNormal, ExponentialLocation, GammaScale, PowerScale]

_MODEL_FIELDS = {
    "normal": (BivariateNormal, ("sigma1", "sigma2", "rho")),
    "exponential": (ExponentialLocation, ("sigma1", "sigma2")),
    "gamma": (GammaScale, ("alpha1", "alpha2")),
    "power": (PowerScale, ("alpha1", "alpha2")),
}


def model_from_config(spec: dict) -> ModelSpec:
    """Build a model from a config mapping: {"name": ..., <spec fields>}."""
    if not isinstance(spec, dict):
        raise ConfigError("model must be an object with a 'name' field")
    data = dict(spec)
    name = data.pop("name", None)
    if name not in _MODEL_FIELDS:
        raise ConfigError(
            f"unknown model name {name!r}; valid: {', '.join(sorted(_MODEL_FIELDS))}"
        )
    cls, fields = _MODEL_FIELDS[name]
    missing = [f for f in fields if f not in data]
    if missing:
        raise ConfigError(f"model {name!r} missing field(s): {', '.join(missing)}")
    unknown = [f for f in data if f not in fields]
    if unknown:
        raise ConfigError(f"model {name!r} has unknown field(s): {', '.join(unknown)}")
    try:
        values = {f: float(data[f]) for f in fields}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"model {name!r} has a non-numeric field: {e}") from e
    return cls(**values)
