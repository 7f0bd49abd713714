"""Catalogue of test functions f for the random variables f(X_1).

Every catalogue entry is an immutable, vectorised callable that also exposes
the structural data the numerical modules rely on:

- ``window``: an interval ``(lo, hi)`` outside of which f is constant, with
  the two constant values in ``limits`` (``None`` if there is no such window);
- ``breakpoints``: the points where f is not smooth;
- ``period``: the period of a periodic f.

Besides evaluation, this module computes sup, Hölder and variation norms
(exactly when possible, by dyadic grid refinement otherwise), proved Hölder
certificates, and displacement energies ``int_a^b (f(y+x) - f(y))^2 dy``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, ClassVar, Union

import numpy as np
from scipy import integrate

from levysmooth.base import BaseReport, SpecValidationError
from levysmooth.utils import gauss_legendre

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Callable, Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

# Float mantissa bits; the default truncation keeps the tail below 2^-52.
MANTISSA_BITS = 52


def _as_float(value: Any, path: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise SpecValidationError(path, f"expected a real number, got {value!r}")
    if not math.isfinite(value):
        raise SpecValidationError(path, f"expected a finite real, got {value}")
    return value


def _check_open_unit(value: Any, path: str) -> float:
    value = _as_float(value, path)
    if not 0 < value < 1:
        raise SpecValidationError(path, f"expected a value in (0, 1), got {value}")
    return value


def _as_int(value: Any, path: str) -> int:
    number = _as_float(value, path)
    if number != int(number):
        raise SpecValidationError(path, f"expected an integer, got {value!r}")
    return int(number)


def _dyadic_distance(x: np.ndarray, n: int) -> np.ndarray:
    """``d(2^n x, Z)``."""
    scaled = np.ldexp(x, n)
    return np.abs(scaled - np.round(scaled))


@dataclass(frozen=True)
class Ciesielski:
    """``g(x) = sum_{n=ell}^{N} 2^{-alpha n} d(2^n x, Z)``.

    A ``2^{-ell}``-periodic function which is alpha-Hölder and no better.
    The truncation ``N`` defaults to ``ell + ceil(52 / alpha)``.
    """

    alpha: float
    ell: int = 0
    truncation: Optional[int] = None
    variant: ClassVar[str] = "ciesielski"
    window: ClassVar[Optional[Tuple[float, float]]] = None
    limits: ClassVar[Optional[Tuple[float, float]]] = None
    breakpoints: ClassVar[Tuple[float, ...]] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_open_unit(self.alpha, "alpha"))
        ell = _as_int(self.ell, "ell")
        if ell < 0:
            raise SpecValidationError("ell", f"expected a nonnegative integer, got {ell}")
        object.__setattr__(self, "ell", ell)

        if self.truncation is None:
            truncation = ell + math.ceil(MANTISSA_BITS / self.alpha)
        else:
            truncation = _as_int(self.truncation, "truncation")
        if truncation < ell:
            raise SpecValidationError(
                "truncation", f"expected an integer >= ell = {ell}, got {truncation}"
            )
        object.__setattr__(self, "truncation", truncation)

    def __call__(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for n in range(self.ell, self.truncation + 1):
            distance = _dyadic_distance(x, n)
            # 2^n x integer implies 2^m x integer for m > n
            if not distance.any():
                break
            total += 2.0 ** (-self.alpha * n) * distance
        return total

    @property
    def period(self) -> float:
        return 2.0 ** (-self.ell)

    def component(self, n: int, x: Any) -> np.ndarray:
        """The unweighted term ``g_n(x) = d(2^n x, Z)``."""
        return _dyadic_distance(np.asarray(x, dtype=float), n)

    @property
    def tail_bound(self) -> float:
        """Uniform bound on the omitted terms ``n > N``."""
        return 2.0 ** (-self.alpha * self.truncation) / (2 * (2.0**self.alpha - 1))

    @property
    def sup_bound(self) -> float:
        return 2.0 ** (-self.alpha * self.ell) / (2 * (1 - 2.0 ** (-self.alpha)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "alpha": self.alpha,
            "ell": self.ell,
            "truncation": self.truncation,
        }


@dataclass(frozen=True)
class Indicator:
    """``1_{[K, inf)}``."""

    K: float
    variant: ClassVar[str] = "indicator"
    period: ClassVar[Optional[float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", _as_float(self.K, "K"))

    def __call__(self, x: Any) -> np.ndarray:
        return (np.asarray(x, dtype=float) >= self.K).astype(float)

    @property
    def window(self) -> Tuple[float, float]:
        return (self.K, self.K)

    @property
    def limits(self) -> Tuple[float, float]:
        return (0.0, 1.0)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.K,)

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "K": self.K}


@dataclass(frozen=True)
class NBVMixture:
    """``f(x) = mu((-inf, x])`` for a signed measure ``mu``.

    ``mu`` is a finite sum of point masses ``w_i delta_{u_i}`` and of constant
    densities ``d`` on intervals ``[a, b]``, so f is right-continuous,
    piecewise linear and vanishes at ``-inf``.
    """

    atoms: Tuple[Tuple[float, float], ...] = ()
    density_pieces: Tuple[Tuple[float, float, float], ...] = ()
    variant: ClassVar[str] = "nbv_mixture"
    period: ClassVar[Optional[float]] = None

    def __post_init__(self) -> None:
        atoms = []
        for i, atom in enumerate(self.atoms):
            path = f"atoms[{i}]"
            try:
                u, w = atom
            except (TypeError, ValueError):
                raise SpecValidationError(path, "expected a pair (location, weight)")
            atoms.append((_as_float(u, path), _as_float(w, path)))
        object.__setattr__(self, "atoms", tuple(atoms))

        pieces = []
        for i, piece in enumerate(self.density_pieces):
            path = f"density_pieces[{i}]"
            try:
                a, b, d = piece
            except (TypeError, ValueError):
                raise SpecValidationError(path, "expected a triple (a, b, density)")
            a, b, d = (_as_float(v, path) for v in (a, b, d))
            if not a < b:
                raise SpecValidationError(path, f"expected a < b, got [{a}, {b}]")
            pieces.append((a, b, d))
        object.__setattr__(self, "density_pieces", tuple(pieces))

    def __call__(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for u, w in self.atoms:
            total += w * (x >= u)
        for a, b, d in self.density_pieces:
            total += d * (np.clip(x, a, b) - a)
        return total

    @property
    def total_mass(self) -> float:
        """``mu(R)``."""
        return sum(w for _, w in self.atoms) + sum(
            d * (b - a) for a, b, d in self.density_pieces
        )

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        points = {u for u, _ in self.atoms}
        for a, b, _ in self.density_pieces:
            points.update((a, b))
        return tuple(sorted(points))

    @property
    def window(self) -> Tuple[float, float]:
        points = self.breakpoints
        if not points:
            return (0.0, 0.0)
        return (points[0], points[-1])

    @property
    def limits(self) -> Tuple[float, float]:
        return (0.0, self.total_mass)

    def jump(self, u: float) -> float:
        """``mu({u})``."""
        return sum(w for v, w in self.atoms if v == u)

    def elementary_densities(self) -> List[Tuple[float, float, float]]:
        """The density of ``mu`` on the intervals between consecutive breakpoints."""
        points = self.breakpoints
        pieces = []
        for left, right in zip(points[:-1], points[1:]):
            middle = 0.5 * (left + right)
            d = sum(dd for a, b, dd in self.density_pieces if a <= middle <= b)
            pieces.append((left, right, d))
        return pieces

    @property
    def total_variation(self) -> float:
        """``|mu|(R)``, which is the variation norm of f."""
        atoms = sum(abs(self.jump(u)) for u in {u for u, _ in self.atoms})
        density = sum(abs(d) * (b - a) for a, b, d in self.elementary_densities())
        return atoms + density

    @property
    def lipschitz_constant(self) -> float:
        """Lipschitz constant of f, infinite as soon as ``mu`` has an atom."""
        if any(self.jump(u) != 0 for u, _ in self.atoms):
            return math.inf
        return max((abs(d) for _, _, d in self.elementary_densities()), default=0.0)

    @property
    def sup_norm(self) -> float:
        """Exact ``sup|f|``; f is monotone between breakpoints."""
        points = np.array(self.breakpoints, dtype=float)
        if points.size == 0:
            return 0.0
        right = self(points)
        left = right - np.array([self.jump(p) for p in points])
        return float(max(np.abs(right).max(), np.abs(left).max(), abs(self.total_mass)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "atoms": [list(a) for a in self.atoms],
            "density_pieces": [list(p) for p in self.density_pieces],
        }


@dataclass(frozen=True)
class PowerCap:
    """``|x|^alpha ^ 1``."""

    alpha: float
    variant: ClassVar[str] = "power_cap"
    window: ClassVar[Tuple[float, float]] = (-1.0, 1.0)
    limits: ClassVar[Tuple[float, float]] = (1.0, 1.0)
    breakpoints: ClassVar[Tuple[float, ...]] = (-1.0, 0.0, 1.0)
    period: ClassVar[Optional[float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_open_unit(self.alpha, "alpha"))

    def __call__(self, x: Any) -> np.ndarray:
        return np.minimum(np.abs(np.asarray(x, dtype=float)) ** self.alpha, 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "alpha": self.alpha}


def smoothing_kernel(theta: float, t: float, y: Any) -> np.ndarray:
    """``g_t(y)``: 0 for ``y <= 0``, ``y^{1/(2 theta)} / t`` up to ``t^{2 theta}``, then 1."""
    y = np.asarray(y, dtype=float)
    tau = t ** (2 * theta)
    inner = np.power(np.clip(y, 0.0, tau), 1 / (2 * theta)) / t
    return np.where(y >= tau, 1.0, inner)


def _kernel_antiderivative(theta: float, t: float, y: Any) -> np.ndarray:
    """``int_{-inf}^y g_t(z) dz``."""
    y = np.asarray(y, dtype=float)
    tau = t ** (2 * theta)
    power = 1 + 1 / (2 * theta)
    return np.power(np.clip(y, 0.0, tau), power) / (power * t) + np.maximum(y - tau, 0.0)


def _check_smoothing(theta: Any, t: Any) -> Tuple[float, float]:
    theta = _as_float(theta, "theta")
    if not 0.5 <= theta < 1:
        raise SpecValidationError("theta", f"expected a value in [1/2, 1), got {theta}")
    return theta, _check_open_unit(t, "t")


@dataclass(frozen=True)
class SmoothedIndicator:
    """``f_t(x) = int g_t(x - u) mu(du)``, the mixture convolved with the kernel ``g_t``."""

    theta: float
    t: float
    mixture: NBVMixture
    variant: ClassVar[str] = "smoothed_indicator"
    period: ClassVar[Optional[float]] = None

    def __post_init__(self) -> None:
        theta, t = _check_smoothing(self.theta, self.t)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "t", t)
        if not isinstance(self.mixture, NBVMixture):
            raise SpecValidationError("mixture", "expected an nbv_mixture")

    @property
    def tau(self) -> float:
        """Width ``t^{2 theta}`` of the kernel ramp."""
        return self.t ** (2 * self.theta)

    def __call__(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for u, w in self.mixture.atoms:
            total += w * smoothing_kernel(self.theta, self.t, x - u)
        for a, b, d in self.mixture.density_pieces:
            total += d * (
                _kernel_antiderivative(self.theta, self.t, x - a)
                - _kernel_antiderivative(self.theta, self.t, x - b)
            )
        return total

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        points = set(self.mixture.breakpoints)
        points.update(p + self.tau for p in self.mixture.breakpoints)
        return tuple(sorted(points))

    @property
    def window(self) -> Tuple[float, float]:
        lo, hi = self.mixture.window
        return (lo, hi + self.tau)

    @property
    def limits(self) -> Tuple[float, float]:
        return (0.0, self.mixture.total_mass)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "theta": self.theta,
            "t": self.t,
            "mixture": self.mixture.to_dict(),
        }


@dataclass(frozen=True)
class Constant:
    """``f = value``."""

    value: float
    variant: ClassVar[str] = "constant"
    window: ClassVar[Tuple[float, float]] = (0.0, 0.0)
    breakpoints: ClassVar[Tuple[float, ...]] = ()
    period: ClassVar[Optional[float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _as_float(self.value, "value"))

    def __call__(self, x: Any) -> np.ndarray:
        return np.full(np.shape(x), self.value)

    @property
    def limits(self) -> Tuple[float, float]:
        return (self.value, self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "value": self.value}


@dataclass(frozen=True)
class Custom:
    """User supplied function of one real variable.

    ``bounds`` declares the interval on which grid norms are estimated;
    without it, the grid covers ``[-10, 10]``.
    """

    evaluator: Callable[[float], float]
    bounds: Optional[Tuple[float, float]] = None
    variant: ClassVar[str] = "custom"
    window: ClassVar[Optional[Tuple[float, float]]] = None
    limits: ClassVar[Optional[Tuple[float, float]]] = None
    breakpoints: ClassVar[Tuple[float, ...]] = ()
    period: ClassVar[Optional[float]] = None
    _vectorized: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.bounds is not None:
            lo, hi = (_as_float(v, "bounds") for v in self.bounds)
            if not lo < hi:
                raise SpecValidationError("bounds", f"expected lo < hi, got {self.bounds}")
            object.__setattr__(self, "bounds", (lo, hi))
        object.__setattr__(
            self, "_vectorized", np.vectorize(self.evaluator, otypes=[float])
        )

    def __call__(self, x: Any) -> np.ndarray:
        return self._vectorized(np.asarray(x, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        raise SpecValidationError("variant", "custom functions cannot be serialized")


FunctionSpec = Union[
    Ciesielski, Indicator, NBVMixture, PowerCap, SmoothedIndicator, Constant, Custom
]

FUNCTION_VARIANTS = (
    Ciesielski.variant,
    Indicator.variant,
    NBVMixture.variant,
    PowerCap.variant,
    SmoothedIndicator.variant,
    Constant.variant,
)


def _mixture_from_dict(data: Dict[str, Any]) -> NBVMixture:
    return NBVMixture(
        atoms=tuple(tuple(a) for a in data.get("atoms", [])),
        density_pieces=tuple(tuple(p) for p in data.get("density_pieces", [])),
    )


def function_from_dict(data: Dict[str, Any], path: str = "function") -> FunctionSpec:
    """Builds a catalogue function from its JSON object.

    Args:
        data: JSON object with a ``variant`` discriminator.
        path: JSON path used in validation messages.

    Returns:
        The function.

    Raises:
        SpecValidationError: Unknown variant or invalid fields.
    """
    if not isinstance(data, dict):
        raise SpecValidationError(path, "expected a JSON object")
    variant = data.get("variant")
    if variant not in FUNCTION_VARIANTS:
        raise SpecValidationError(f"{path}.variant", f"unknown variant {variant!r}")

    if variant == SmoothedIndicator.variant:
        mixture_data = data.get("mixture")
        if not isinstance(mixture_data, dict):
            raise SpecValidationError(f"{path}.mixture", "expected a JSON object")
        mixture = function_from_dict(
            {"variant": NBVMixture.variant, **mixture_data}, f"{path}.mixture"
        )

    try:
        if variant == Ciesielski.variant:
            return Ciesielski(
                alpha=data["alpha"],
                ell=data.get("ell", 0),
                truncation=data.get("truncation"),
            )
        if variant == Indicator.variant:
            return Indicator(K=data["K"])
        if variant == NBVMixture.variant:
            return _mixture_from_dict(data)
        if variant == PowerCap.variant:
            return PowerCap(alpha=data["alpha"])
        if variant == SmoothedIndicator.variant:
            return SmoothedIndicator(theta=data["theta"], t=data["t"], mixture=mixture)
        return Constant(value=data["value"])
    except KeyError as e:
        raise SpecValidationError(f"{path}.{e.args[0]}", "missing field")
    except TypeError:
        raise SpecValidationError(path, "malformed list of atoms or pieces")
    except SpecValidationError as e:
        raise SpecValidationError(f"{path}.{e.path}", e.message)


def evaluate(f: FunctionSpec, x: Any) -> Any:
    """``f(x)``, a float for scalar ``x``."""
    values = f(x)
    if np.ndim(x) == 0:
        return float(values)
    return values


def holder_constant_bound(alpha: float) -> float:
    """Proved bound ``1 / ((2^{1-alpha} - 1)(1 - 2^{-alpha}))`` on the alpha-Hölder seminorm of a Ciesielski function."""
    alpha = _check_open_unit(alpha, "alpha")
    return 1 / ((2 ** (1 - alpha) - 1) * (1 - 2 ** (-alpha)))


@dataclass(frozen=True)
class NormValue:
    """A norm with its provenance.

    ``method`` is ``exact`` or ``grid-estimate``. Grid estimates are lower
    estimates; ``converged`` is False when the point budget was hit before two
    successive refinements agreed. ``upper_bound`` holds a proved bound when
    one is known.
    """

    value: float
    method: str
    resolution: Optional[float] = None
    converged: bool = True
    upper_bound: Optional[float] = None
    domain: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class NormReport(BaseReport):
    function: Dict[str, Any]
    alpha: Optional[float]
    sup_norm: NormValue
    holder_seminorm: Optional[NormValue]
    bv_norm: NormValue

    @property
    def holder_norm(self) -> Optional[float]:
        """``sup|f| + [f]_alpha``."""
        if self.holder_seminorm is None:
            return None
        return self.sup_norm.value + self.holder_seminorm.value


class GridNormEstimator:
    """Estimates sup, Hölder and variation norms on refined dyadic grids.

    The grid has ``2^m + 1`` points, starting at ``m = start_level`` and
    doubling until two successive levels agree within ``tolerance``
    (relative) or ``max_points`` is reached. Hölder quotients are taken over
    the lags ``1..16`` and every power of two, so each level costs
    ``O(n log n)``.
    """

    start_level: int = 10
    max_points: int = 2**24
    tolerance: float = 1e-4
    default_domain: Tuple[float, float] = (-10.0, 10.0)

    def __init__(
        self,
        start_level: Optional[int] = None,
        max_points: Optional[int] = None,
        tolerance: Optional[float] = None,
    ):
        self.start_level = start_level or self.start_level
        self.max_points = max_points or self.max_points
        self.tolerance = tolerance or self.tolerance

    def domain(self, f: FunctionSpec) -> Tuple[float, float]:
        if f.period is not None:
            return (0.0, f.period)
        if isinstance(f, Custom):
            if f.bounds is None:
                logger.warning(
                    f"Custom function without declared bounds, grid on {self.default_domain}"
                )
                return self.default_domain
            return f.bounds
        lo, hi = f.window
        margin = max(1.0, hi - lo)
        return (lo - margin, hi + margin)

    @staticmethod
    def _lags(n_intervals: int) -> List[int]:
        lags = set(range(1, min(16, n_intervals) + 1))
        k = 32
        while k <= n_intervals:
            lags.add(k)
            k *= 2
        return sorted(lags)

    def _level(
        self, f: FunctionSpec, alpha: Optional[float], lo: float, hi: float, m: int
    ) -> Tuple[float, float, float]:
        n_intervals = 2**m
        h = (hi - lo) / n_intervals
        values = f(lo + h * np.arange(n_intervals + 1))
        sup = float(np.abs(values).max())

        periodic = f.period is not None
        variation = float(np.abs(np.diff(values)).sum())
        if not periodic and f.limits is not None:
            left, right = f.limits
            variation += abs(values[0] - left) + abs(right - values[-1])

        holder = math.nan
        if alpha is not None:
            holder = 0.0
            if periodic:
                cycle = values[:-1]
                for k in self._lags(n_intervals // 2):
                    diff = np.abs(np.roll(cycle, -k) - cycle).max()
                    holder = max(holder, diff / (k * h) ** alpha)
            else:
                for k in self._lags(n_intervals):
                    diff = np.abs(values[k:] - values[:-k]).max()
                    holder = max(holder, diff / (k * h) ** alpha)
        return sup, float(holder), variation

    def estimate(
        self, f: FunctionSpec, alpha: Optional[float] = None
    ) -> Tuple[NormValue, Optional[NormValue], NormValue]:
        """Grid estimates of the sup norm, alpha-Hölder seminorm and variation.

        Args:
            f: The function.
            alpha: Hölder exponent, or None to skip the seminorm.

        Returns:
            The three estimates (the seminorm is None without ``alpha``).
        """
        lo, hi = self.domain(f)
        m = self.start_level
        previous = None
        converged = False
        while True:
            current = self._level(f, alpha, lo, hi, m)
            if previous is not None:
                converged = all(
                    abs(c - p) <= self.tolerance * max(1.0, abs(c))
                    for c, p in zip(current, previous)
                    if not math.isnan(c)
                )
            if converged or 2 ** (m + 1) + 1 > self.max_points:
                break
            previous = current
            m += 1

        if not converged:
            logger.info(f"Grid norms stopped at the point budget, 2^{m} intervals")
        resolution = (hi - lo) / 2**m
        sup, holder, variation = (
            NormValue(v, "grid-estimate", resolution, converged, domain=(lo, hi))
            for v in current
        )
        return sup, (holder if alpha is not None else None), variation


def _exact(value: float, upper_bound: Optional[float] = None) -> NormValue:
    return NormValue(value, "exact", upper_bound=upper_bound)


def _with_upper_bound(value: NormValue, upper_bound: float) -> NormValue:
    return NormValue(
        value.value,
        value.method,
        value.resolution,
        value.converged,
        upper_bound,
        value.domain,
    )


def grid_norms(
    f: FunctionSpec, alpha: Optional[float] = None, max_points: Optional[int] = None
) -> Tuple[NormValue, Optional[NormValue], NormValue]:
    """Grid estimates only, whatever the catalogue entry."""
    return GridNormEstimator(max_points=max_points).estimate(f, alpha)


def norms(
    f: FunctionSpec, alpha: Optional[float] = None, max_points: Optional[int] = None
) -> NormReport:
    """Sup norm, alpha-Hölder seminorm and variation norm of f.

    Exact values are used wherever the catalogue entry allows it; the rest
    comes from :class:`GridNormEstimator`. For Ciesielski functions the
    geometric-series sup bound and the proved Hölder constant are attached
    as ``upper_bound``.

    Args:
        f: The function.
        alpha: Hölder exponent; the seminorm is skipped when None.
        max_points: Grid point budget, ``2^24`` by default.

    Returns:
        The norm report.
    """
    if alpha is not None:
        alpha = _check_open_unit(alpha, "alpha")
    try:
        description = f.to_dict()
    except SpecValidationError:
        description = {"variant": f.variant}

    if isinstance(f, Constant):
        sup, holder, bv = _exact(abs(f.value)), _exact(0.0), _exact(0.0)
    elif isinstance(f, Indicator):
        sup, holder, bv = _exact(1.0), _exact(math.inf), _exact(1.0)
    elif isinstance(f, NBVMixture) and f.lipschitz_constant == math.inf:
        sup, holder, bv = _exact(f.sup_norm), _exact(math.inf), _exact(f.total_variation)
    elif isinstance(f, PowerCap) and alpha is not None and alpha > f.alpha:
        # |x|^{f.alpha - alpha} is unbounded near 0
        sup, bv = _exact(1.0), _exact(2.0)
        _, holder, _ = grid_norms(f, alpha, max_points)
        holder = _with_upper_bound(holder, math.inf)
    elif isinstance(f, PowerCap):
        sup, holder, bv = _exact(1.0), _exact(1.0), _exact(2.0)
    else:
        sup, holder, bv = grid_norms(f, alpha, max_points)
        if isinstance(f, NBVMixture):
            sup, bv = _exact(f.sup_norm), _exact(f.total_variation)
            if holder is not None:
                holder = _with_upper_bound(
                    holder, max(f.lipschitz_constant, 2 * f.sup_norm)
                )
        elif isinstance(f, Ciesielski):
            sup = _with_upper_bound(sup, f.sup_bound)
            bv = _exact(math.inf)
            if holder is not None and alpha <= f.alpha:
                holder = _with_upper_bound(
                    holder, holder_certificate(f, alpha).seminorm
                )
        elif isinstance(f, SmoothedIndicator):
            mass = f.mixture.total_variation
            sup = _with_upper_bound(sup, mass)
            bv = _with_upper_bound(bv, mass)

    if alpha is None:
        holder = None
    return NormReport(description, alpha, sup, holder, bv)


@dataclass(frozen=True)
class HolderCertificate(BaseReport):
    """Proved bounds ``sup|f| <= sup_norm`` and ``[f]_alpha <= seminorm``."""

    alpha: float
    sup_norm: float
    seminorm: float
    method: str

    @property
    def norm(self) -> float:
        return self.sup_norm + self.seminorm


def holder_certificate(f: FunctionSpec, alpha: Optional[float] = None) -> HolderCertificate:
    """Proved bound on ``||f||_{C^alpha_b} = sup|f| + [f]_alpha``.

    A function that is beta-Hölder with seminorm ``C`` and bounded by ``S``
    is alpha-Hölder for ``alpha <= beta`` with seminorm at most
    ``max(C, 2 S)``.

    Args:
        f: The function.
        alpha: Hölder exponent; defaults to the exponent of a Ciesielski or
            power-cap function.

    Returns:
        The certificate.

    Raises:
        SpecValidationError: If no certificate is known for this pair.
    """
    if alpha is None:
        if not isinstance(f, (Ciesielski, PowerCap)):
            raise SpecValidationError("alpha", "a Hölder exponent is required")
        alpha = f.alpha
    alpha = _check_open_unit(alpha, "alpha")

    if isinstance(f, Constant):
        return HolderCertificate(alpha, abs(f.value), 0.0, "constant")
    if isinstance(f, PowerCap) and alpha <= f.alpha:
        return HolderCertificate(alpha, 1.0, 1.0, "power-cap")
    if isinstance(f, Ciesielski) and alpha <= f.alpha:
        constant = holder_constant_bound(f.alpha)
        if alpha < f.alpha:
            constant = max(constant, 2 * f.sup_bound)
        return HolderCertificate(alpha, f.sup_bound, constant, "ciesielski-series")
    if isinstance(f, NBVMixture) and f.lipschitz_constant < math.inf:
        sup = f.sup_norm
        return HolderCertificate(
            alpha, sup, max(f.lipschitz_constant, 2 * sup), "lipschitz"
        )
    if isinstance(f, SmoothedIndicator) and alpha <= 1 / (2 * f.theta):
        mass = f.mixture.total_variation
        return HolderCertificate(alpha, mass, max(mass / f.t, 2 * mass), "kernel")
    raise SpecValidationError(
        "function", f"no Hölder certificate for {f.variant} at alpha = {alpha}"
    )


def _ciesielski_period_energy(f: Ciesielski, x: float) -> float:
    """``int (g(y+x) - g(y))^2 dy`` over one period ``[0, 2^{-ell}]``.

    Cross terms vanish over a period, and for the tent ``d(., Z)``
    ``int_0^1 (d(z+h) - d(z))^2 dz = h^2 - 4h^3/3`` with ``h = d(x, Z)``.
    """
    total = 0.0
    for n in range(f.ell, f.truncation + 1):
        h = float(_dyadic_distance(np.asarray(x, dtype=float), n))
        if h == 0.0:
            break
        total += 2.0 ** (-2 * f.alpha * n) * (h * h - 4 * h**3 / 3)
    return f.period * total


def _gauss_energy(
    f: FunctionSpec, cuts: np.ndarray, x: float, nodes_per_piece: int
) -> float:
    reference, reference_weights = gauss_legendre(-1.0, 1.0, nodes_per_piece)
    half = 0.5 * np.diff(cuts)[:, None]
    nodes = 0.5 * (cuts[:-1] + cuts[1:])[:, None] + half * reference
    weights = half * reference_weights
    return float(np.sum(weights * (f(nodes + x) - f(nodes)) ** 2))


def _shifted_cuts(
    f: FunctionSpec, a: float, b: float, x: float
) -> np.ndarray:
    points = [a, b]
    for p in f.breakpoints:
        points.extend(q for q in (p, p - x) if a < q < b)
    return np.unique(points)


def displacement_energy(f: FunctionSpec, interval: Tuple[float, float], x: float) -> float:
    """``int_a^b (f(y+x) - f(y))^2 dy``.

    Piecewise linear functions are integrated exactly with two Gauss nodes
    between consecutive kinks of ``y -> f(y+x) - f(y)``. Ciesielski functions
    use the closed form over whole periods; other functions use adaptive
    quadrature split at their breakpoints.

    Args:
        f: The function.
        interval: ``(a, b)`` with ``a < b``.
        x: The shift.

    Returns:
        The energy.
    """
    a, b = (_as_float(v, "interval") for v in interval)
    if not a < b:
        raise SpecValidationError("interval", f"expected a < b, got [{a}, {b}]")
    x = _as_float(x, "x")
    if x == 0 or isinstance(f, Constant):
        return 0.0

    if isinstance(f, (Indicator, NBVMixture)):
        return _gauss_energy(f, _shifted_cuts(f, a, b, x), x, 2)

    if isinstance(f, Ciesielski):
        periods = math.floor((b - a) / f.period)
        total = periods * _ciesielski_period_energy(f, x)
        start = a + periods * f.period
        if b > start:
            cuts = np.linspace(start, b, 2**12 + 1)
            total += _gauss_energy(f, cuts, x, 4)
        return total

    cuts = _shifted_cuts(f, a, b, x)
    total = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate.quad(
            lambda y: float(f(y + x) - f(y)) ** 2, left, right, limit=200
        )
        total += value
    return total


@dataclass(frozen=True)
class SmoothingDecomposition:
    """Split of an NBV function ``f = f_t + (f - f_t)`` with the kernel ``g_t``."""

    mixture: NBVMixture
    smoothed: SmoothedIndicator

    @property
    def theta(self) -> float:
        return self.smoothed.theta

    @property
    def t(self) -> float:
        return self.smoothed.t

    @property
    def tau(self) -> float:
        return self.smoothed.tau

    def remainder(self, x: Any) -> np.ndarray:
        """``f(x) - f_t(x)``."""
        return self.mixture(x) - self.smoothed(x)

    def increment_bound(self, x: Any) -> np.ndarray:
        """``sup_z |g_t(z+x) - g_t(z)| <= g_t(|x|) <= 1``."""
        return smoothing_kernel(self.theta, self.t, np.abs(np.asarray(x, dtype=float)))

    def support_length(self, x: Any) -> np.ndarray:
        """Length ``t^{2 theta} + |x|`` of the set where ``g_t(.+x) != g_t``."""
        return self.tau + np.abs(np.asarray(x, dtype=float))

    def energy_bound(self, x: Any) -> np.ndarray:
        """``2 t^{2(theta-1)} |x|^{1/theta}``, bounding :func:`kernel_shift_energy`."""
        x = np.abs(np.asarray(x, dtype=float))
        return 2 * self.t ** (2 * (self.theta - 1)) * x ** (1 / self.theta)


def smoothing_decomposition(
    mixture: NBVMixture, theta: float, t: float
) -> SmoothingDecomposition:
    return SmoothingDecomposition(mixture, SmoothedIndicator(theta, t, mixture))


def kernel_shift_energy(theta: float, t: float, x: float) -> float:
    """``int (g_t(z+x) - g_t(z))^2 dz`` over the real line."""
    theta, t = _check_smoothing(theta, t)
    shift = abs(_as_float(x, "x"))
    if shift == 0:
        return 0.0
    tau = t ** (2 * theta)
    # the integrand vanishes outside [-shift, tau]
    points = [p for p in (0.0, tau - shift) if -shift < p < tau]
    value, _ = integrate.quad(
        lambda z: float(
            smoothing_kernel(theta, t, z + shift) - smoothing_kernel(theta, t, z)
        )
        ** 2,
        -shift,
        tau,
        points=points or None,
        limit=200,
    )
    return value


def powercap_regime_bound(alpha: float, x: float, p_sup: float) -> float:
    """Envelope of the displacement expectation ``G(x)`` for ``|x|^alpha ^ 1``.

    Valid for ``0 < |x| <= 1`` when ``X_1`` has a density bounded by
    ``p_sup``; the shape depends on whether ``alpha`` is below, at or above
    one half.
    """
    alpha = _check_open_unit(alpha, "alpha")
    x = abs(_as_float(x, "x"))
    if not 0 < x <= 1:
        raise SpecValidationError("x", f"expected 0 < |x| <= 1, got {x}")
    if alpha < 0.5:
        return p_sup * x ** (2 * alpha + 1) * (4 + 2 * alpha**2 / (1 - 2 * alpha))
    if alpha == 0.5:
        return p_sup * x**2 * (4 + 2 * math.log(2 / x))
    return p_sup * x ** (2 * alpha + 1) * (
        4 + 2 ** (2 * alpha) * alpha**2 * x ** (1 - 2 * alpha) / (2 * alpha - 1)
    )
