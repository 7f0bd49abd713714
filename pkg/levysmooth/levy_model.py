"""Lévy measures of symmetric pure-jump processes.

This module defines the catalogue of Lévy measures used throughout the
package, the moment functionals ``m_xi = int (|x|^xi ^ 1) nu(dx)``, the
Blumenthal-Getoor index, the Hartman-Wintner ratio and the conversion
between the density coefficient ``b`` of a stable measure and the scale
``c`` of its characteristic function ``exp(-c|u|^beta)``.

Small-jump integrals are computed in the variable ``s = log(1/|x|)``, where
the singularity at the origin becomes an exponential tail on ``[0, inf)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, ClassVar, Union

import numpy as np
from scipy import integrate, special

from levysmooth.base import SpecValidationError
from levysmooth.utils import gauss_legendre, integrate_dyadic_cutoffs

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Callable, Dict, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)


def _as_float(value: Any, path: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise SpecValidationError(path, f"expected a real number, got {value!r}")


def _check_positive(value: float, path: str) -> float:
    value = _as_float(value, path)
    if not math.isfinite(value) or value <= 0:
        raise SpecValidationError(path, f"expected a positive real, got {value}")
    return value


def _check_range(
    value: float, lo: float, hi: float, path: str, hi_closed: bool = False
) -> float:
    value = _as_float(value, path)
    inside = lo < value <= hi if hi_closed else lo < value < hi
    if not inside:
        bracket = "]" if hi_closed else ")"
        raise SpecValidationError(path, f"expected a value in ({lo}, {hi}{bracket}, got {value}")
    return value


@dataclass(frozen=True)
class SymmetricStable:
    """Stable Lévy measure ``b|x|^{-1-beta} dx``."""

    b: float
    beta: float
    variant: ClassVar[str] = "symmetric_stable"

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", _check_positive(self.b, "b"))
        object.__setattr__(self, "beta", _check_range(self.beta, 0, 2, "beta"))

    def two_sided_density(self, x: Any) -> Any:
        """``h(x) + h(-x)`` for ``x > 0``."""
        return 2 * self.b * np.power(x, -1 - self.beta)

    def small_jump_integrand(self, s: float, xi: float) -> float:
        return 2 * self.b * math.exp(-s * (xi - self.beta))

    def tail_beyond(self, r: float) -> float:
        """``nu(|x| > r)``."""
        return 2 * self.b * r ** (-self.beta) / self.beta

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "b": self.b, "beta": self.beta}


@dataclass(frozen=True)
class LogDampedStable:
    """Measure ``b / (|x|^{1+beta} (log^2|x| + 1)) dx``, whose boundary moment ``m_beta`` is finite."""

    b: float
    beta: float
    variant: ClassVar[str] = "log_damped_stable"

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", _check_positive(self.b, "b"))
        object.__setattr__(
            self, "beta", _check_range(self.beta, 0, 2, "beta", hi_closed=True)
        )

    def two_sided_density(self, x: Any) -> Any:
        log_x = np.log(x)
        return 2 * self.b * np.power(x, -1 - self.beta) / (log_x**2 + 1)

    def small_jump_integrand(self, s: float, xi: float) -> float:
        return 2 * self.b * math.exp(-s * (xi - self.beta)) / (s * s + 1)

    def tail_beyond(self, r: float) -> float:
        # x = e^u
        value, _ = integrate.quad(
            lambda u: 2 * self.b * math.exp(-self.beta * u) / (u * u + 1),
            math.log(r),
            np.inf,
        )
        return value

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "b": self.b, "beta": self.beta}


@dataclass(frozen=True)
class FiniteDiscrete:
    """Finite measure ``sum_i lambda_i delta_{x_i}``."""

    atoms: Tuple[Tuple[float, float], ...] = ()
    variant: ClassVar[str] = "finite_discrete"

    def __post_init__(self) -> None:
        atoms = []
        for i, atom in enumerate(self.atoms):
            try:
                location, intensity = (float(v) for v in atom)
            except (TypeError, ValueError):
                raise SpecValidationError(
                    f"atoms[{i}]", "expected a pair (location, intensity)"
                )
            if location == 0 or not math.isfinite(location):
                raise SpecValidationError(
                    f"atoms[{i}]", "atom location must be a nonzero real"
                )
            atoms.append((location, _check_positive(intensity, f"atoms[{i}]")))
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([lam for _, lam in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        return float(self.intensities.sum())

    def tail_beyond(self, r: float) -> float:
        return float(self.intensities[np.abs(self.locations) > r].sum())

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "atoms": [list(a) for a in self.atoms]}


@dataclass(frozen=True)
class GenericDensity:
    """Measure ``h(x) dx`` with a user supplied density ``h`` on ``R \\ {0}``.

    ``int (x^2 ^ 1) h(x) dx`` is checked at construction: the integral must
    converge and its last dyadic refinement must move it by less than
    ``integrability_tol`` (relative).
    """

    h: Callable[[float], float]
    integrability_tol: float = 1e-6
    variant: ClassVar[str] = "generic_density"
    _vectorized: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _check_positive(self.integrability_tol, "integrability_tol")
        object.__setattr__(self, "_vectorized", np.vectorize(self.h, otypes=[float]))

        small = integrate_dyadic_cutoffs(lambda s: self.small_jump_integrand(s, 2.0))
        tail = self.tail_beyond(1.0)
        increment = (
            small.partials[-1] - small.partials[-2] if len(small.partials) > 1 else 0.0
        )
        if (
            not small.finite
            or not math.isfinite(tail)
            or increment > self.integrability_tol * max(1.0, small.value)
        ):
            raise SpecValidationError(
                "h", "density does not integrate (x^2 ^ 1) to a finite value"
            )

    def density(self, x: Any) -> np.ndarray:
        """``h(x)``."""
        return self._vectorized(x)

    def two_sided_density(self, x: Any) -> Any:
        with np.errstate(over="ignore", invalid="ignore"):
            return self._vectorized(x) + self._vectorized(-np.asarray(x))

    def small_jump_integrand(self, s: float, xi: float) -> float:
        x = math.exp(-s)
        if x == 0.0:
            return 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            value = (self.h(x) + self.h(-x)) * math.exp(-s * (xi + 1))
        return float(value)

    def tail_beyond(self, r: float) -> float:
        value, _ = integrate.quad(
            lambda x: self.h(x) + self.h(-x), r, np.inf, limit=200
        )
        return value

    def to_dict(self) -> Dict[str, Any]:
        raise SpecValidationError(
            "variant", "generic_density measures cannot be serialized"
        )


LevyMeasureSpec = Union[SymmetricStable, LogDampedStable, FiniteDiscrete, GenericDensity]

MEASURE_VARIANTS = {
    SymmetricStable.variant: SymmetricStable,
    LogDampedStable.variant: LogDampedStable,
    FiniteDiscrete.variant: FiniteDiscrete,
}


def measure_from_dict(data: Dict[str, Any], path: str = "measure") -> LevyMeasureSpec:
    """Builds a measure from its JSON object.

    Args:
        data: JSON object with a ``variant`` discriminator.
        path: JSON path used in validation messages.

    Returns:
        The measure.

    Raises:
        SpecValidationError: Unknown variant or invalid fields.
    """
    if not isinstance(data, dict):
        raise SpecValidationError(path, "expected a JSON object")
    variant = data.get("variant")
    if variant not in MEASURE_VARIANTS:
        raise SpecValidationError(f"{path}.variant", f"unknown variant {variant!r}")
    try:
        if variant == FiniteDiscrete.variant:
            return FiniteDiscrete(atoms=tuple(tuple(a) for a in data.get("atoms", [])))
        return MEASURE_VARIANTS[variant](b=data["b"], beta=data["beta"])
    except KeyError as e:
        raise SpecValidationError(f"{path}.{e.args[0]}", "missing field")
    except TypeError:
        raise SpecValidationError(f"{path}.atoms", "expected a list of pairs")
    except SpecValidationError as e:
        raise SpecValidationError(f"{path}.{e.path}", e.message)


@dataclass(frozen=True)
class MomentValue:
    xi: float
    value: float
    finite: bool
    abs_error: float
    method: str


@dataclass(frozen=True)
class BGIndex:
    beta: float
    source: str
    boundary_moment_finite: Optional[bool] = None
    fit_residual: Optional[float] = None


def _check_xi(xi: float) -> float:
    xi = float(xi)
    if not xi >= 0:
        raise SpecValidationError("xi", f"expected xi >= 0, got {xi}")
    return xi


def tail_mass(measure: LevyMeasureSpec) -> float:
    """``nu({|x| > 1})``."""
    return measure.tail_beyond(1.0)


def _tail_by_quadrature(measure: LevyMeasureSpec) -> Tuple[float, float]:
    return integrate.quad(
        lambda x: float(measure.two_sided_density(x)), 1.0, np.inf, limit=200
    )


def small_jump_moment(measure: LevyMeasureSpec, xi: float) -> MomentValue:
    """``int_{|x| <= 1} |x|^xi nu(dx)``, divergence reported as ``inf``."""
    xi = _check_xi(xi)
    if isinstance(measure, FiniteDiscrete):
        mask = np.abs(measure.locations) <= 1
        value = float(
            (measure.intensities[mask] * np.abs(measure.locations[mask]) ** xi).sum()
        )
        return MomentValue(xi, value, True, 0.0, "exact_sum")

    result = integrate_dyadic_cutoffs(lambda s: measure.small_jump_integrand(s, xi))
    return MomentValue(xi, result.value, result.finite, result.abs_error, "quadrature")


def moment(
    measure: LevyMeasureSpec, xi: float, method: Optional[str] = None
) -> MomentValue:
    """Computes ``m_xi = int (|x|^xi ^ 1) nu(dx)``.

    Args:
        measure: The Lévy measure.
        xi: Nonnegative exponent.
        method: ``"quadrature"`` forces quadrature for the stable measure,
            whose moment is otherwise given in closed form.

    Returns:
        The moment. Divergent moments are returned with ``value = inf``.
    """
    xi = _check_xi(xi)
    if isinstance(measure, FiniteDiscrete):
        value = float(
            (measure.intensities * np.minimum(np.abs(measure.locations) ** xi, 1)).sum()
        )
        return MomentValue(xi, value, True, 0.0, "exact_sum")

    if isinstance(measure, SymmetricStable) and method != "quadrature":
        if xi <= measure.beta:
            return MomentValue(xi, math.inf, False, 0.0, "closed_form")
        value = 2 * measure.b * (1 / (xi - measure.beta) + 1 / measure.beta)
        return MomentValue(xi, value, True, 0.0, "closed_form")

    small = small_jump_moment(measure, xi)
    if not small.finite:
        return MomentValue(xi, math.inf, False, 0.0, "quadrature")
    tail, tail_err = _tail_by_quadrature(measure)
    return MomentValue(
        xi, small.value + tail, True, small.abs_error + tail_err, "quadrature"
    )


def truncated_abs_moment(measure: LevyMeasureSpec, xi: float, r: float) -> float:
    """``int_{0 < |x| <= r} |x|^xi nu(dx)``, possibly ``inf``."""
    xi = _check_xi(xi)
    r = _check_positive(r, "r")
    if isinstance(measure, FiniteDiscrete):
        mask = np.abs(measure.locations) <= r
        return float(
            (measure.intensities[mask] * np.abs(measure.locations[mask]) ** xi).sum()
        )
    if isinstance(measure, SymmetricStable):
        if xi <= measure.beta:
            return math.inf
        return 2 * measure.b * r ** (xi - measure.beta) / (xi - measure.beta)

    if r <= 1:
        shift = math.log(1 / r)
        result = integrate_dyadic_cutoffs(
            lambda s: measure.small_jump_integrand(s + shift, xi)
        )
        return result.value

    small = small_jump_moment(measure, xi)
    if not small.finite:
        return math.inf
    middle, _ = integrate.quad(
        lambda x: x**xi * float(measure.two_sided_density(x)), 1.0, r, limit=200
    )
    return small.value + middle


def bg_index(measure: LevyMeasureSpec) -> BGIndex:
    """Blumenthal-Getoor index ``inf {xi >= 0 : m_xi < inf}``.

    Analytic for the parametric variants. For a generic density the index
    is the least-squares slope of ``log nu(eps < |x| <= 1)`` against
    ``log(1/eps)`` on ``eps = 2^-4, ..., 2^-20``; the fit residual is
    reported with it.
    """
    if isinstance(measure, SymmetricStable):
        return BGIndex(measure.beta, "analytic", boundary_moment_finite=False)
    if isinstance(measure, LogDampedStable):
        return BGIndex(measure.beta, "analytic", boundary_moment_finite=True)
    if isinstance(measure, FiniteDiscrete):
        return BGIndex(0.0, "analytic", boundary_moment_finite=True)

    exponents = np.arange(4, 21)
    s_edges = np.concatenate([[0.0], exponents * math.log(2)])
    pieces = [
        integrate.quad(
            lambda s: measure.small_jump_integrand(s, 0.0), lo, hi, limit=200
        )[0]
        for lo, hi in zip(s_edges[:-1], s_edges[1:])
    ]
    masses = np.cumsum(pieces)
    if np.all(masses <= 0):
        return BGIndex(0.0, "estimated", fit_residual=0.0)

    usable = masses > 0
    log_inv_eps = s_edges[1:][usable]
    log_mass = np.log(masses[usable])
    slope, intercept = np.polyfit(log_inv_eps, log_mass, 1)
    residual = float(
        np.sqrt(np.mean((log_mass - (slope * log_inv_eps + intercept)) ** 2))
    )
    beta = float(np.clip(slope, 0.0, 2.0))
    logger.debug(f"Estimated BG index {beta:.4f} with residual {residual:.3e}")
    return BGIndex(beta, "estimated", fit_residual=residual)


def hartman_wintner_ratio(
    measure: LevyMeasureSpec, u: float, max_half_periods: int = 100_000
) -> float:
    """Computes ``int sin^2(ux) nu(dx) / log|u|``.

    With ``v = |u| x`` the first half-period ``[0, pi]`` is integrated with
    the logarithmic substitution, the next ``ceil(|u|) ^ max_half_periods``
    half-periods by Gauss-Legendre, and the remainder from the tail of
    ``nu``, using ``sin^2 = (1 - cos 2v)/2`` and an oscillatory rule for the
    cosine part. The remainder never exceeds ``nu(|x| > K pi/|u|)``.

    Args:
        measure: The Lévy measure.
        u: Frequency with ``|u| > 1``.
        max_half_periods: Cap on the number of half-periods integrated exactly.

    Returns:
        The ratio.
    """
    u = abs(float(u))
    if not u > 1:
        raise SpecValidationError("u", f"expected |u| > 1, got {u}")
    log_u = math.log(u)

    if isinstance(measure, FiniteDiscrete):
        return float(
            (measure.intensities * np.sin(u * measure.locations) ** 2).sum() / log_u
        )

    def g(v: Any) -> Any:
        return measure.two_sided_density(np.asarray(v) / u) / u

    s0 = math.log(u / math.pi)

    def first_half_period(s: float) -> float:
        # x = e^{-(s + s0)}, sin^2(ux) = sinc^2(ux) u^2 x^2
        y = math.pi * math.exp(-s)
        sinc = math.sin(y) / y if y > 0 else 1.0
        return sinc * sinc * measure.small_jump_integrand(s + s0, 2.0)

    first = u * u * integrate_dyadic_cutoffs(first_half_period).value

    n_half_periods = min(math.ceil(u), max_half_periods)
    middle = 0.0
    if n_half_periods > 1:
        nodes, weights = gauss_legendre(0.0, math.pi, 32)
        starts = math.pi * np.arange(1, n_half_periods)
        v = starts[:, None] + nodes[None, :]
        middle = float(np.sum(weights[None, :] * np.sin(v) ** 2 * g(v)))

    edge = math.pi * n_half_periods
    bound = measure.tail_beyond(edge / u)
    oscillating, _ = integrate.quad(
        lambda v: float(g(v)), edge, np.inf, weight="cos", wvar=2.0, limlst=100
    )
    remainder = 0.5 * bound - 0.5 * oscillating
    logger.debug(f"Hartman-Wintner remainder {remainder:.3e}, bound {bound:.3e}")

    return (first + middle + remainder) / log_u


@dataclass(frozen=True)
class HartmanWintnerReport:
    u: Tuple[float, ...]
    ratio: Tuple[float, ...]
    liminf: float
    bounded_density_criterion: bool


def hartman_wintner_liminf(
    measure: LevyMeasureSpec, u_grid: Optional[Sequence[float]] = None
) -> HartmanWintnerReport:
    """Estimates the liminf of the Hartman-Wintner ratio on a grid of large ``|u|``.

    The estimate is the minimum over the upper half of the grid. A value
    above 1/2 is the criterion for ``X_t`` to have bounded continuous
    densities.
    """
    u_grid = tuple(u_grid or (2.0**k for k in range(4, 21)))
    ratios = tuple(hartman_wintner_ratio(measure, u) for u in u_grid)
    liminf = float(min(ratios[len(ratios) // 2 :]))
    return HartmanWintnerReport(u_grid, ratios, liminf, liminf > 0.5)


@lru_cache(maxsize=64)
def _cosine_integral(beta: float) -> float:
    """``int_0^inf (1 - cos v) v^{-1-beta} dv``."""

    def near_zero(v: float) -> float:
        # (1 - cos v)/v^2, times the algebraic weight v^{1-beta}
        if v == 0:
            return 0.5
        return 2 * math.sin(v / 2) ** 2 / (v * v)

    head, _ = integrate.quad(
        near_zero, 0.0, 1.0, weight="alg", wvar=(1 - beta, 0.0), epsabs=1e-14
    )
    oscillating, _ = integrate.quad(
        lambda v: v ** (-1 - beta), 1.0, np.inf, weight="cos", wvar=1.0, epsabs=1e-14
    )
    return head + 1 / beta - oscillating


def nu_to_char_scale(b: float, beta: float) -> float:
    """Scale ``c`` of ``exp(-c|u|^beta)`` for the measure ``b|x|^{-1-beta} dx``.

    Uses the Lévy-Khintchine exponent of a symmetric measure,
    ``c = 2b int_0^inf (1 - cos v) v^{-1-beta} dv``.
    """
    b = _check_positive(b, "b")
    beta = _check_range(beta, 0, 2, "beta")
    return 2 * b * _cosine_integral(beta)


def char_scale_to_nu(c: float, beta: float) -> float:
    """Inverse of :func:`nu_to_char_scale`."""
    c = _check_positive(c, "c")
    beta = _check_range(beta, 0, 2, "beta")
    return c / (2 * _cosine_integral(beta))


def char_scale_closed_form(b: float, beta: float) -> float:
    """Closed form of :func:`nu_to_char_scale`, used as a cross-check."""
    if beta == 1:
        return math.pi * b
    return 2 * b * special.gamma(1 - beta) * math.cos(math.pi * beta / 2) / beta
