"""Estimator catalog for the four models plus the generic clamp-improvement
constructors.

Location estimators have the equivariant form X_i - psi(D) with D = X2 - X1;
scale estimators the form psi(D) * X_i with D = X2 / X1 and psi > 0. The
clamp constructors project a kernel onto the band spanned by the
conditional-median bounds, which is what produces the *_star entries of the
catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    DomainError,
    KindMismatchError,
    UnknownEstimatorError,
    UnsupportedCaseError,
)
from .models import (
    BivariateNormal,
    ExponentialLocation,
    GammaScale,
    ModelSpec,
    PowerScale,
    ProblemKind,
)
from .specfun import gamma_median

__all__ = [
    "LossKind",
    "LossFn",
    "Estimator",
    "ClampBounds",
    "beta_weight",
    "clamp_location",
    "clamp_scale",
    "default_bounds",
    "catalog",
    "normal_nu_family",
    "resolve_estimator",
    "estimator_names",
]

_LN2 = math.log(2.0)


class LossKind(Enum):
    LOCATION_ABS = "location_abs"
    LOCATION_SQUARED = "location_squared"
    SCALE_ABS = "scale_abs"
    SCALE_SQUARED = "scale_squared"


@dataclass(frozen=True)
class LossFn:
    """Loss with minimum 0 at the truth: at 0 error for location kinds, at
    ratio 1 for scale kinds.
    """

    kind: LossKind

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def problem_kind(self) -> ProblemKind:
        if self.kind in (LossKind.LOCATION_ABS, LossKind.LOCATION_SQUARED):
            return ProblemKind.LOCATION
        return ProblemKind.SCALE

    @property
    def is_absolute(self) -> bool:
        return self.kind in (LossKind.LOCATION_ABS, LossKind.SCALE_ABS)

    def evaluate(self, estimate, theta):
        if self.kind is LossKind.LOCATION_ABS:
            return np.abs(estimate - theta)
        if self.kind is LossKind.LOCATION_SQUARED:
            return (estimate - theta) ** 2
        if self.kind is LossKind.SCALE_ABS:
            return np.abs(estimate / theta - 1.0)
        return (estimate / theta - 1.0) ** 2

    @classmethod
    def from_name(cls, name: str) -> "LossFn":
        try:
            return cls(LossKind(name))
        except ValueError:
            valid = ", ".join(k.value for k in LossKind)
            raise UnsupportedCaseError(
                f"unknown loss {name!r}; valid: {valid}"
            ) from None


@dataclass(frozen=True)
class Estimator:
    """A named equivariant estimator given by its kernel on the contrast."""

    name: str
    target: int
    kind: ProblemKind
    psi: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if self.target not in (1, 2):
            raise DomainError(f"target must be 1 or 2, got {self.target}")

    def evaluate(self, x1, x2):
        scalar = np.ndim(x1) == 0 and np.ndim(x2) == 0
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        xi = x1 if self.target == 1 else x2
        if self.kind is ProblemKind.LOCATION:
            out = xi - self.psi(x2 - x1)
        else:
            out = self.psi(x2 / x1) * xi
        return float(out) if scalar else out


@dataclass(frozen=True)
class ClampBounds:
    """Extended-real bounds (l, u) bracketing the conditional median for
    every gap value; +-inf arms are represented as actual infinities.
    """

    lower: Callable[[np.ndarray], np.ndarray]
    upper: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()


def beta_weight(alpha: float) -> float:
    """Order-respecting mixing weight: alpha clipped to [0, 1]."""
    return min(1.0, max(0.0, alpha))


_LOCATION_PROBES = np.array([-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0])
_SCALE_PROBES = np.array([0.25, 0.5, 1.0, 2.0, 4.0])


def _check_band(bounds: ClampBounds, kind: ProblemKind) -> None:
    probes = _LOCATION_PROBES if kind is ProblemKind.LOCATION else _SCALE_PROBES
    lo = np.asarray(bounds.lower(probes), dtype=float)
    hi = np.asarray(bounds.upper(probes), dtype=float)
    if not np.all(lo <= hi):
        raise DomainError("clamp bounds must satisfy l(t) <= u(t)")


def clamp_location(base: Estimator, bounds: ClampBounds) -> Estimator:
    """Project a location kernel onto [l(t), u(t)]."""
    if base.kind is not ProblemKind.LOCATION:
        raise KindMismatchError(f"{base.name} is not a location estimator")
    _check_band(bounds, ProblemKind.LOCATION)
    psi = base.psi

    def clamped(t):
        return np.maximum(bounds.lower(t), np.minimum(psi(t), bounds.upper(t)))

    return Estimator(
        name=base.name + "_star",
        target=base.target,
        kind=base.kind,
        psi=clamped,
        breakpoints=tuple(sorted({*base.breakpoints, *bounds.breakpoints})),
    )


def _reciprocal(x):
    """1/x with the clamp conventions 1/0+ = +inf and 1/inf = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x == 0.0, np.inf, 1.0 / x)


def clamp_scale(base: Estimator, bounds: ClampBounds) -> Estimator:
    """Project a scale kernel onto [1/u(t), 1/l(t)]."""
    if base.kind is not ProblemKind.SCALE:
        raise KindMismatchError(f"{base.name} is not a scale estimator")
    _check_band(bounds, ProblemKind.SCALE)
    psi = base.psi

    def clamped(t):
        lo = _reciprocal(bounds.upper(t))
        hi = _reciprocal(bounds.lower(t))
        return np.maximum(lo, np.minimum(psi(t), hi))

    return Estimator(
        name=base.name + "_star",
        target=base.target,
        kind=base.kind,
        psi=clamped,
        breakpoints=tuple(sorted({*base.breakpoints, *bounds.breakpoints})),
    )


def default_bounds(model: ModelSpec, component: int) -> ClampBounds:
    """The inf/sup-over-gap envelope of the conditional median for the given
    model and component.
    """
    if component not in (1, 2):
        raise UnsupportedCaseError(f"component must be 1 or 2, got {component}")
    if isinstance(model, BivariateNormal):
        a = model.alpha
        slope = a - 1.0 if component == 1 else a  # median slope in t at gap 0
        if component == 1:
            low_finite, up_finite = a <= 1.0, a >= 1.0
        else:
            low_finite, up_finite = a <= 0.0, a >= 0.0

        def lower(t):
            t = np.asarray(t, dtype=float)
            return slope * t if low_finite else np.full_like(t, -np.inf)

        def upper(t):
            t = np.asarray(t, dtype=float)
            return slope * t if up_finite else np.full_like(t, np.inf)

        return ClampBounds(lower, upper)
    if isinstance(model, ExponentialLocation):
        c = model.pooled_scale * _LN2
        if component == 1:
            return ClampBounds(
                lower=lambda t: np.maximum(0.0, -np.asarray(t, dtype=float)) + c,
                upper=lambda t: np.full_like(np.asarray(t, dtype=float), np.inf),
                breakpoints=(0.0,),
            )
        return ClampBounds(
            lower=lambda t: np.full_like(np.asarray(t, dtype=float), c),
            upper=lambda t: np.maximum(np.asarray(t, dtype=float), 0.0) + c,
            breakpoints=(0.0,),
        )
    if isinstance(model, GammaScale):
        nu = model.pooled_median
        if component == 1:
            return ClampBounds(
                lower=lambda t: nu / (1.0 + np.asarray(t, dtype=float)),
                upper=lambda t: np.full_like(np.asarray(t, dtype=float), nu),
            )
        return ClampBounds(
            lower=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            upper=lambda t: nu * np.asarray(t, dtype=float)
            / (1.0 + np.asarray(t, dtype=float)),
        )
    if isinstance(model, PowerScale):
        m = 2.0 ** (-1.0 / model.shape_sum)
        if component == 1:
            return ClampBounds(
                lower=lambda t: m * np.minimum(1.0, 1.0 / np.asarray(t, dtype=float)),
                upper=lambda t: np.full_like(np.asarray(t, dtype=float), m),
                breakpoints=(1.0,),
            )
        return ClampBounds(
            lower=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            upper=lambda t: m * np.minimum(1.0, np.asarray(t, dtype=float)),
            breakpoints=(1.0,),
        )
    raise UnsupportedCaseError(f"no bounds for model {type(model).__name__}")


def _with_breakpoints(est: Estimator, points) -> Estimator:
    pts = tuple(sorted({*est.breakpoints, *(p for p in points if math.isfinite(p))}))
    return replace(est, breakpoints=pts)


def _normal_catalog(model: BivariateNormal, component: int) -> list[Estimator]:
    a = model.alpha
    b = beta_weight(a)
    kind = ProblemKind.LOCATION
    bounds = default_bounds(model, component)
    if component == 1:
        pnlee = Estimator("pnlee", 1, kind, lambda t: np.zeros_like(np.asarray(t, dtype=float)))
        rmle = Estimator(
            "rmle", 1, kind,
            lambda t: (1.0 - a) * np.maximum(0.0, -np.asarray(t, dtype=float)),
            breakpoints=(0.0,),
        )
        hp = Estimator(
            "hp", 1, kind,
            lambda t: np.maximum(0.0, (a - 1.0) * np.asarray(t, dtype=float)),
            breakpoints=(0.0,),
        )
        pdt = Estimator(
            "pdt", 1, kind,
            lambda t: (1.0 - b) * np.maximum(0.0, -np.asarray(t, dtype=float)),
            breakpoints=(0.0,),
        )
        out = [pnlee, rmle, hp, pdt]
        if a > 1.0:
            out.append(clamp_location(hp, bounds))  # hp_star: the linear blend
        return out
    pnlee = Estimator("pnlee", 2, kind, lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    rmle = Estimator(
        "rmle", 2, kind,
        lambda t: -a * np.maximum(0.0, -np.asarray(t, dtype=float)),
        breakpoints=(0.0,),
    )
    hp = Estimator(
        "hp", 2, kind,
        lambda t: -np.maximum(0.0, -a * np.asarray(t, dtype=float)),
        breakpoints=(0.0,),
    )
    pdt = Estimator(
        "pdt", 2, kind,
        lambda t: -b * np.maximum(0.0, -np.asarray(t, dtype=float)),
        breakpoints=(0.0,),
    )
    pnlee_star = _with_breakpoints(clamp_location(pnlee, bounds), (0.0,))
    rmle_star = clamp_location(rmle, bounds)
    return [pnlee, rmle, hp, pdt, pnlee_star, rmle_star]


def _exponential_catalog(model: ExponentialLocation, component: int) -> list[Estimator]:
    kind = ProblemKind.LOCATION
    s1, s2 = model.sigma1, model.sigma2
    c = model.pooled_scale * _LN2
    bounds = default_bounds(model, component)
    if component == 1:
        pnlee = Estimator(
            "pnlee", 1, kind,
            lambda t: np.full_like(np.asarray(t, dtype=float), s1 * _LN2),
        )
        rmle = Estimator(
            "rmle", 1, kind,
            lambda t: np.maximum(0.0, -np.asarray(t, dtype=float)),
            breakpoints=(0.0,),
        )
        pnlee_star = _with_breakpoints(
            clamp_location(pnlee, bounds), (c - s1 * _LN2,)
        )
        rmle_star = clamp_location(rmle, bounds)
        return [pnlee, rmle, pnlee_star, rmle_star]
    pnlee = Estimator(
        "pnlee", 2, kind,
        lambda t: np.full_like(np.asarray(t, dtype=float), s2 * _LN2),
    )
    rmle = Estimator("rmle", 2, kind, lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    pnlee_star = _with_breakpoints(
        clamp_location(pnlee, bounds), (s2 ** 2 * _LN2 / (s1 + s2),)
    )
    rmle_star = clamp_location(rmle, bounds)
    return [pnlee, rmle, pnlee_star, rmle_star]


def _gamma_catalog(model: GammaScale, component: int) -> list[Estimator]:
    kind = ProblemKind.SCALE
    a1, a2 = model.alpha1, model.alpha2
    asum = a1 + a2
    nu = model.pooled_median
    bounds = default_bounds(model, component)
    if component == 1:
        nu1 = gamma_median(a1)
        ue = Estimator("ue", 1, kind, lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / a1))
        pnsee = Estimator(
            "pnsee", 1, kind, lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / nu1)
        )
        rmle = Estimator(
            "rmle", 1, kind,
            lambda t: np.minimum(1.0 / a1, (1.0 + np.asarray(t, dtype=float)) / asum),
            breakpoints=(a2 / a1,),
        )
        rmle_star = _with_breakpoints(clamp_scale(rmle, bounds), (asum / nu - 1.0,))
        pnsee_star = _with_breakpoints(clamp_scale(pnsee, bounds), (nu / nu1 - 1.0,))
        ue_star = _with_breakpoints(clamp_scale(ue, bounds), (nu / a1 - 1.0,))
        return [ue, pnsee, rmle, rmle_star, pnsee_star, ue_star]
    nu2 = gamma_median(a2)
    ue = Estimator("ue", 2, kind, lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / a2))
    pnsee = Estimator(
        "pnsee", 2, kind, lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / nu2)
    )
    rmle = Estimator(
        "rmle", 2, kind,
        lambda t: np.maximum(
            1.0 / a2,
            (1.0 + np.asarray(t, dtype=float)) / (np.asarray(t, dtype=float) * asum),
        ),
        breakpoints=(a2 / a1,),
    )
    rmle_star = _with_breakpoints(
        clamp_scale(rmle, bounds),
        (a2 / (nu - a2),) if nu > a2 else (),
    )
    pnsee_star = _with_breakpoints(
        clamp_scale(pnsee, bounds),
        (nu2 / (nu - nu2),) if nu > nu2 else (),
    )
    return [ue, pnsee, rmle, rmle_star, pnsee_star]


def _power_catalog(model: PowerScale, component: int) -> list[Estimator]:
    kind = ProblemKind.SCALE
    a1, a2 = model.alpha1, model.alpha2
    asum = model.shape_sum
    bounds = default_bounds(model, component)
    if component == 1:
        pnsee = Estimator(
            "pnsee", 1, kind,
            lambda t: np.full_like(np.asarray(t, dtype=float), 2.0 ** (1.0 / a1)),
        )
        pnsee_star = _with_breakpoints(
            clamp_scale(pnsee, bounds), (1.0, 2.0 ** (a2 / (a1 * asum)))
        )
        return [pnsee, pnsee_star]
    pnsee = Estimator(
        "pnsee", 2, kind,
        lambda t: np.full_like(np.asarray(t, dtype=float), 2.0 ** (1.0 / a2)),
    )
    pnsee_star = _with_breakpoints(
        clamp_scale(pnsee, bounds), (1.0, 2.0 ** (-a1 / (a2 * asum)))
    )
    return [pnsee, pnsee_star]


def catalog(model: ModelSpec, component: int) -> list[Estimator]:
    """All named estimators for the given model and target component."""
    if component not in (1, 2):
        raise UnsupportedCaseError(f"component must be 1 or 2, got {component}")
    if isinstance(model, BivariateNormal):
        return _normal_catalog(model, component)
    if isinstance(model, ExponentialLocation):
        return _exponential_catalog(model, component)
    if isinstance(model, GammaScale):
        return _gamma_catalog(model, component)
    if isinstance(model, PowerScale):
        return _power_catalog(model, component)
    raise UnsupportedCaseError(f"no catalog for model {type(model).__name__}")


def normal_nu_family(
    model: BivariateNormal, nu: float, hp_tail: bool = False
) -> Estimator:
    """One member of the one-parameter improvement family for the smaller
    normal mean: kernel -(1-nu) t on t <= 0, with either a zero tail or the
    linear-blend tail on t > 0.

    The admissible nu range depends on the sign regime of the model's mixing
    coefficient; range endpoints are accepted as closed wherever the regime
    conditions state them that way.
    """
    a = model.alpha
    if a == 1.0:
        raise UnsupportedCaseError(
            "no improvement family exists when the mixing coefficient is 1"
        )
    if hp_tail:
        if not a > 1.0:
            raise UnsupportedCaseError(
                "the blend-tail family requires mixing coefficient > 1"
            )
        if not 1.0 < nu <= a:
            raise DomainError(f"nu must lie in (1, {a}], got {nu}")
    elif a > 1.0:
        if not 1.0 < nu <= a:
            raise DomainError(f"nu must lie in (1, {a}], got {nu}")
    elif a >= 0.0:
        if not a <= nu < 1.0:
            raise DomainError(f"nu must lie in [{a}, 1), got {nu}")
    else:
        if not a <= nu < 0.0:
            raise DomainError(f"nu must lie in [{a}, 0), got {nu}")

    def psi(t):
        t = np.asarray(t, dtype=float)
        tail = -(1.0 - a) * t if hp_tail else np.zeros_like(t)
        return np.where(t <= 0.0, -(1.0 - nu) * t, tail)

    label = "psi_nu_hp" if hp_tail else "psi_nu"
    return Estimator(
        name=f"{label}[{nu:g}]",
        target=1,
        kind=ProblemKind.LOCATION,
        psi=psi,
        breakpoints=(0.0,),
    )


def estimator_names(model: ModelSpec, component: int) -> list[str]:
    """Names accepted by resolve_estimator for this model/component."""
    names = [e.name for e in catalog(model, component)]
    if isinstance(model, BivariateNormal) and component == 1 and model.alpha != 1.0:
        names.append("psi_nu")
        if model.alpha > 1.0:
            names.append("psi_nu_hp")
    return names


def resolve_estimator(
    model: ModelSpec, component: int, name: str, nu: float | None = None
) -> Estimator:
    """Look up a catalog estimator by its stable identifier; the improvement
    family names require the nu parameter.
    """
    for est in catalog(model, component):
        if est.name == name:
            return est
    if name in ("psi_nu", "psi_nu_hp"):
        if not (isinstance(model, BivariateNormal) and component == 1):
            raise UnknownEstimatorError(name, estimator_names(model, component))
        if nu is None:
            raise UnsupportedCaseError(f"estimator {name!r} requires a nu value")
        return normal_nu_family(model, nu, hp_tail=(name == "psi_nu_hp"))
    raise UnknownEstimatorError(name, estimator_names(model, component))
