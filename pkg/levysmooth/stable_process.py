"""Symmetric strictly stable and compound Poisson processes.

The stable process has characteristic function ``exp(-t c |u|^beta)``.
Samples come from the Chambers-Mallows-Stuck transformation, densities from
Fourier inversion of the characteristic function. Distribution functions are
read from a cached table of the unit law (``t c = 1``) built on a sinh-spaced
grid, continued by the series expansion of the tails; the self-similarity
``X_t = (t c)^{1/beta} X`` reduces every other case to the unit law.

The compound Poisson process has a finite discrete Lévy measure; its law at
any time is computed exactly as a finite convolution of Poisson laws.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, ClassVar, Union

import numpy as np
from scipy import integrate, optimize, special, stats
from scipy.interpolate import CubicSpline

from levysmooth.base import LevySmoothError, QuadratureError, SpecValidationError
from levysmooth.levy_model import FiniteDiscrete, SymmetricStable, char_scale_to_nu, nu_to_char_scale
from levysmooth.utils import gauss_legendre, substream_rng

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Callable, Dict, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

DENSITY_ABS_ERROR_CEILING = 1e-6
WARRANTED_MIN_BETA = 0.3
KS_CRITICAL_COEFFICIENT = 1.95


@dataclass(frozen=True)
class StableParams:
    """Parameters of the law with characteristic function ``exp(-c|u|^beta)``."""

    beta: float
    c: float
    variant: ClassVar[str] = "stable"

    def __post_init__(self) -> None:
        for name in ("beta", "c"):
            try:
                object.__setattr__(self, name, float(getattr(self, name)))
            except (TypeError, ValueError):
                raise SpecValidationError(name, "expected a real number")
        if not 0 < self.beta < 2:
            raise SpecValidationError("beta", f"expected a value in (0, 2), got {self.beta}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise SpecValidationError("c", f"expected a positive real, got {self.c}")

    @classmethod
    def from_measure(cls, measure: SymmetricStable) -> StableParams:
        return cls(beta=measure.beta, c=nu_to_char_scale(measure.b, measure.beta))

    def levy_measure(self) -> SymmetricStable:
        return SymmetricStable(b=char_scale_to_nu(self.c, self.beta), beta=self.beta)

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "beta": self.beta, "c": self.c}


@dataclass(frozen=True)
class CompoundPoissonParams:
    """Compound Poisson process with jumps ``x_i`` at rates ``lambda_i``."""

    atoms: Tuple[Tuple[float, float], ...] = ()
    variant: ClassVar[str] = "compound_poisson"

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", FiniteDiscrete(atoms=self.atoms).atoms)

    def levy_measure(self) -> FiniteDiscrete:
        return FiniteDiscrete(atoms=self.atoms)

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "atoms": [list(a) for a in self.atoms]}


ProcessSpec = Union[StableParams, CompoundPoissonParams]


def process_from_dict(data: Dict[str, Any], path: str = "process") -> ProcessSpec:
    """Builds a process spec from its JSON object.

    Raises:
        SpecValidationError: Unknown variant or invalid fields.
    """
    if not isinstance(data, dict):
        raise SpecValidationError(path, "expected a JSON object")
    variant = data.get("variant")
    try:
        if variant == StableParams.variant:
            return StableParams(beta=data["beta"], c=data["c"])
        if variant == CompoundPoissonParams.variant:
            return CompoundPoissonParams(
                atoms=tuple(tuple(a) for a in data.get("atoms", []))
            )
    except KeyError as e:
        raise SpecValidationError(f"{path}.{e.args[0]}", "missing field")
    except TypeError:
        raise SpecValidationError(f"{path}.atoms", "expected a list of pairs")
    except SpecValidationError as e:
        raise SpecValidationError(f"{path}.{e.path}", e.message)
    raise SpecValidationError(f"{path}.variant", f"unknown variant {variant!r}")


@dataclass(frozen=True)
class SampleBatch:
    """Draws of ``X_t``, reproducible from ``(seed, substream, t, n)``.

    For compound Poisson batches, ``jump_counts`` holds the number of jumps on
    ``(0, t]`` and ``big_jump_counts`` the number of jumps with ``|x| > 1``.
    """

    values: np.ndarray
    t: float
    seed: int
    substream: int
    jump_counts: Optional[np.ndarray] = None
    big_jump_counts: Optional[np.ndarray] = None


def _check_sampling(t: float, n: int) -> None:
    if not t > 0:
        raise SpecValidationError("t", f"expected t > 0, got {t}")
    if int(n) < 1:
        raise SpecValidationError("n", f"expected n >= 1, got {n}")


def standard_symmetric_stable(
    beta: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Chambers-Mallows-Stuck draws with characteristic function ``exp(-|u|^beta)``."""
    phi = rng.uniform(-np.pi / 2, np.pi / 2, size=size)
    if beta == 1:
        return np.tan(phi)
    w = rng.standard_exponential(size=size)
    return (
        np.sin(beta * phi)
        / np.cos(phi) ** (1 / beta)
        * (np.cos((1 - beta) * phi) / w) ** ((1 - beta) / beta)
    )


def sample_stable(
    params: StableParams, t: float, n: int, seed: int, substream: int
) -> SampleBatch:
    """Draws ``n`` independent copies of ``X_t``.

    Args:
        params: Law of ``X_1``.
        t: Time.
        n: Number of draws.
        seed: Master seed.
        substream: Substream index.

    Returns:
        The batch.
    """
    _check_sampling(t, n)
    rng = substream_rng(seed, substream)
    values = (t * params.c) ** (1 / params.beta) * standard_symmetric_stable(
        params.beta, int(n), rng
    )
    return SampleBatch(values, t, seed, substream)


def sample_cpp(
    atoms: Sequence[Tuple[float, float]], t: float, n: int, seed: int, substream: int
) -> SampleBatch:
    """Exact draws of a compound Poisson process, ``X_t = sum_i x_i Poisson(lambda_i t)``."""
    _check_sampling(t, n)
    measure = FiniteDiscrete(atoms=tuple(atoms))
    n = int(n)
    if not measure.atoms:
        zeros = np.zeros(n, dtype=np.int64)
        return SampleBatch(np.zeros(n), t, seed, substream, zeros, zeros.copy())

    rng = substream_rng(seed, substream)
    counts = rng.poisson(measure.intensities * t, size=(n, len(measure.atoms)))
    big = np.abs(measure.locations) > 1
    return SampleBatch(
        values=counts @ measure.locations,
        t=t,
        seed=seed,
        substream=substream,
        jump_counts=counts.sum(axis=1),
        big_jump_counts=counts[:, big].sum(axis=1),
    )


def fourier_inversion(k: float, beta: float, x: float) -> float:
    """``(1/pi) int_0^U exp(-k u^beta) cos(ux) du`` with ``k U^beta = 40``.

    Args:
        k: Scale ``t c`` of the characteristic exponent.
        beta: Stability index.
        x: Point of evaluation.

    Returns:
        The density of the law ``exp(-k|u|^beta)`` at ``x``.

    Raises:
        QuadratureError: If the error estimate exceeds the ceiling.
    """
    upper = (40 / k) ** (1 / beta)
    x = abs(float(x))
    if x == 0:
        value, err = integrate.quad(
            lambda u: math.exp(-k * u**beta), 0, upper, limit=500, epsabs=1e-13, epsrel=1e-11
        )
    else:
        value, err = integrate.quad(
            lambda u: math.exp(-k * u**beta),
            0,
            upper,
            weight="cos",
            wvar=x,
            limit=500,
            epsabs=1e-13,
            epsrel=1e-11,
        )
    if err > DENSITY_ABS_ERROR_CEILING:
        raise QuadratureError(
            f"Density inversion failed for beta={beta}, x={x}", err, (0.0, upper)
        )
    return value / math.pi


def density(params: StableParams, t: float, x: float) -> float:
    """Density of ``X_t`` at ``x`` by Fourier inversion of the unit law."""
    if not t > 0:
        raise SpecValidationError("t", f"expected t > 0, got {t}")
    _warn_unwarranted(params.beta)
    sigma = (t * params.c) ** (1 / params.beta)
    return fourier_inversion(1.0, params.beta, x / sigma) / sigma


def _warn_unwarranted(beta: float) -> None:
    if beta < WARRANTED_MIN_BETA:
        logger.warning(
            f"Density inversion for beta={beta} < {WARRANTED_MIN_BETA} is not warranted"
        )


def _tail_series(y: np.ndarray, beta: float, kind: str, max_terms: int = 40) -> np.ndarray:
    """Tail expansion of the unit law at ``y > 0``.

    ``kind="pdf"`` gives the density, ``kind="sf"`` the survival function. The
    series converges for ``beta <= 1`` and is asymptotic otherwise; the sum
    stops at the smallest term.
    """
    y = np.asarray(y, dtype=float)
    log_y = np.log(y)
    total = np.zeros_like(y)
    active = np.ones(y.shape, dtype=bool)
    previous = np.full(y.shape, np.inf)
    for k in range(1, max_terms + 1):
        if kind == "pdf":
            log_mag = (
                special.gammaln(beta * k + 1)
                - special.gammaln(k + 1)
                - (beta * k + 1) * log_y
            )
        else:
            log_mag = (
                special.gammaln(beta * k) - special.gammaln(k + 1) - beta * k * log_y
            )
        sine = math.sin(math.pi * beta * k / 2)
        active &= log_mag <= previous
        magnitude = np.exp(log_mag)
        total = np.where(active, total + (-1) ** (k + 1) * sine * magnitude, total)
        previous = log_mag
        active &= magnitude > 1e-17 * np.abs(total)
        if not active.any():
            break
    return total / math.pi


class UnitStableLaw:
    """Tabulated law with characteristic function ``exp(-|u|^beta)``.

    The density is inverted at ``y = a sinh(z)`` on ``[0, Y]``, with ``Y^beta``
    equal to 20 (``beta < 1``) or 50, and interpolated by a cubic spline in
    ``z``. The distribution function integrates the spline; beyond ``Y`` the
    tail series take over.
    """

    a: float = 0.05
    n_nodes: int = 1024

    def __init__(self, beta: float):
        self.beta = float(beta)
        _warn_unwarranted(self.beta)
        self.y_max = (20.0 if self.beta < 1 else 50.0) ** (1 / self.beta)
        self.z_max = math.asinh(self.y_max / self.a)

        z = np.linspace(0.0, self.z_max, self.n_nodes)
        y = self.a * np.sinh(z)
        p = np.array([fourier_inversion(1.0, self.beta, yi) for yi in y])

        self._pdf = CubicSpline(z, p)
        self._half_cdf = CubicSpline(z, p * self.a * np.cosh(z)).antiderivative()
        logger.debug(
            f"Unit stable table for beta={self.beta}: "
            f"mass on [0, {self.y_max:.3g}] = {float(self._half_cdf(self.z_max)):.10f}"
        )

    def _z(self, y: np.ndarray) -> np.ndarray:
        return np.arcsinh(y / self.a)

    def pdf(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.abs(x).ravel()
        inside = y <= self.y_max
        out = np.empty_like(y)
        out[inside] = self._pdf(self._z(y[inside]))
        if (~inside).any():
            out[~inside] = _tail_series(y[~inside], self.beta, "pdf")
        return np.maximum(out, 0.0).reshape(x.shape)

    def sf(self, x: Any) -> np.ndarray:
        """``P(X > x)``."""
        x = np.asarray(x, dtype=float)
        y = np.abs(x).ravel()
        inside = y <= self.y_max
        upper = np.empty_like(y)
        upper[inside] = 0.5 - self._half_cdf(self._z(y[inside]))
        if (~inside).any():
            upper[~inside] = _tail_series(y[~inside], self.beta, "sf")
        upper = np.clip(upper, 0.0, 0.5).reshape(x.shape)
        return np.where(x >= 0, upper, 1.0 - upper)

    def cdf(self, x: Any) -> np.ndarray:
        return self.sf(-np.asarray(x, dtype=float))


@lru_cache(maxsize=32)
def unit_stable_law(beta: float) -> UnitStableLaw:
    return UnitStableLaw(beta)


class StableProcess:
    """Symmetric strictly stable process with ``E exp(iuX_t) = exp(-t c|u|^beta)``."""

    def __init__(self, params: StableParams):
        self.params = params
        self._law: Optional[UnitStableLaw] = None

    @property
    def law(self) -> UnitStableLaw:
        if self._law is None:
            self._law = unit_stable_law(self.params.beta)
        return self._law

    def scale(self, t: float = 1.0) -> float:
        return (t * self.params.c) ** (1 / self.params.beta)

    def levy_measure(self) -> SymmetricStable:
        return self.params.levy_measure()

    @property
    def p_sup(self) -> float:
        """``sup_x p_1(x) = p_1(0)``."""
        beta, c = self.params.beta, self.params.c
        return special.gamma(1 + 1 / beta) / (math.pi * c ** (1 / beta))

    def sample(self, t: float, n: int, seed: int, substream: int) -> SampleBatch:
        return sample_stable(self.params, t, n, seed, substream)

    def pdf(self, x: Any, t: float = 1.0) -> np.ndarray:
        sigma = self.scale(t)
        return self.law.pdf(np.asarray(x, dtype=float) / sigma) / sigma

    def cdf(self, x: Any, t: float = 1.0) -> np.ndarray:
        return self.law.cdf(np.asarray(x, dtype=float) / self.scale(t))

    def sf(self, x: Any, t: float = 1.0) -> np.ndarray:
        return self.law.sf(np.asarray(x, dtype=float) / self.scale(t))

    def mass(self, a: float, b: float, t: float = 1.0) -> float:
        """``P(a < X_t <= b)``."""
        if b <= a:
            return 0.0
        sigma = self.scale(t)
        if b - a < 1e-3 * sigma:
            nodes, weights = gauss_legendre(a, b, 8)
            return float(np.sum(weights * self.pdf(nodes, t)))
        if a >= 0:
            return float(self.sf(a, t) - self.sf(b, t))
        if b <= 0:
            return float(self.sf(-b, t) - self.sf(-a, t))
        return float(1.0 - self.sf(-a, t) - self.sf(b, t))

    def ppf(self, q: float, t: float = 1.0) -> float:
        """Quantile of ``X_t``."""
        if not 0 < q < 1:
            raise SpecValidationError("q", f"expected a value in (0, 1), got {q}")
        bound = 1.0
        while float(self.law.cdf(bound)) < q or float(self.law.cdf(-bound)) > q:
            bound *= 2
        root = optimize.brentq(
            lambda y: float(self.law.cdf(y)) - q, -bound, bound, xtol=1e-12
        )
        return root * self.scale(t)

    def periodized_pdf(
        self, y: Any, t: float = 1.0, tol: float = 1e-17, period: float = 1.0
    ) -> np.ndarray:
        """``sum_k p_t(y + kP)`` by Poisson summation.

        ``(1 + 2 sum_m exp(-tc(2 pi m / P)^beta) cos(2 pi m y / P)) / P``.
        """
        y = np.asarray(y, dtype=float) / period
        k = t * self.params.c / period**self.params.beta
        m_max = max(1, math.ceil((-math.log(tol) / k) ** (1 / self.params.beta) / (2 * math.pi)))
        m = np.arange(1, m_max + 1)
        coefficients = np.exp(-k * (2 * np.pi * m) ** self.params.beta)
        return (1.0 + 2.0 * np.cos(2 * np.pi * np.multiply.outer(y, m)) @ coefficients) / period


class CompoundPoissonProcess:
    """Compound Poisson process with a finite discrete Lévy measure."""

    truncation: float = 1e-14
    max_support: int = 1_000_000

    def __init__(self, params: CompoundPoissonParams):
        self.params = params
        self.measure = params.levy_measure()

    def levy_measure(self) -> FiniteDiscrete:
        return self.measure

    def sample(self, t: float, n: int, seed: int, substream: int) -> SampleBatch:
        return sample_cpp(self.params.atoms, t, n, seed, substream)

    def law(self, t: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
        """Exact law of ``X_t`` as sorted support points and probabilities.

        Each Poisson count is truncated where its tail mass falls below
        ``truncation``.
        """
        return _cpp_law(self.params.atoms, float(t), self.truncation, self.max_support)

    def cdf(self, x: Any, t: float = 1.0) -> np.ndarray:
        support, probs = self.law(t)
        cumulative = np.cumsum(probs)
        index = np.searchsorted(support, np.asarray(x, dtype=float), side="right")
        return np.where(index > 0, cumulative[np.maximum(index - 1, 0)], 0.0)

    def expect(self, func: Callable[[np.ndarray], np.ndarray], t: float = 1.0) -> float:
        """``E[func(X_t)]`` under the exact law."""
        support, probs = self.law(t)
        return float(np.sum(probs * func(support)))


@lru_cache(maxsize=64)
def _cpp_law(
    atoms: Tuple[Tuple[float, float], ...], t: float, truncation: float, max_support: int
) -> Tuple[np.ndarray, np.ndarray]:
    support = np.zeros(1)
    probs = np.ones(1)
    for location, intensity in atoms:
        rate = intensity * t
        k_max = int(stats.poisson.isf(truncation, rate)) + 1
        k = np.arange(k_max + 1)
        pmf = stats.poisson.pmf(k, rate)

        points = np.add.outer(support, k * location).ravel()
        weights = np.multiply.outer(probs, pmf).ravel()
        keys = np.round(points, 12)
        support, inverse = np.unique(keys, return_inverse=True)
        probs = np.zeros(support.size)
        np.add.at(probs, inverse, weights)

        if support.size > max_support:
            raise LevySmoothError(
                f"Compound Poisson law exceeds {max_support} support points"
            )
    return support, probs


Process = Union[StableProcess, CompoundPoissonProcess]


def make_process(spec: ProcessSpec) -> Process:
    if isinstance(spec, StableParams):
        return StableProcess(spec)
    return CompoundPoissonProcess(spec)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    critical: float
    passed: bool
    n: int


def scaling_check(params: StableParams, t: float, n: int, seed: int) -> KSResult:
    """Two-sample KS distance between ``X_t`` and ``t^{1/beta} X_1``.

    The two samples use substreams 0 and 1. The critical value is
    ``1.95 sqrt(2/n)``, the asymptotic two-sample bound at level 0.001.
    """
    if not 0 < t <= 1:
        raise SpecValidationError("t", f"expected t in (0, 1], got {t}")
    if int(n) < 10_000:
        raise SpecValidationError("n", f"expected n >= 10000, got {n}")
    n = int(n)
    direct = sample_stable(params, t, n, seed, 0).values
    scaled = t ** (1 / params.beta) * sample_stable(params, 1.0, n, seed, 1).values
    result = stats.ks_2samp(direct, scaled)
    critical = KS_CRITICAL_COEFFICIENT * math.sqrt(2 / n)
    logger.info(
        f"Scaling check beta={params.beta}, t={t}: KS {result.statistic:.5f} "
        f"(critical {critical:.5f})"
    )
    return KSResult(
        float(result.statistic), float(result.pvalue), critical, bool(result.statistic < critical), n
    )


def sampler_ks_check(
    params: StableParams, n: int, seed: int, substream: int = 0
) -> KSResult:
    """One-sample KS test of the sampler against the law of ``X_1``.

    Uses the Cauchy distribution function for ``beta = 1`` and the tabulated
    one otherwise; the critical value is ``1.95/sqrt(n)``.
    """
    values = sample_stable(params, 1.0, n, seed, substream).values
    if params.beta == 1:
        cdf: Callable[[np.ndarray], np.ndarray] = stats.cauchy(scale=params.c).cdf
    else:
        cdf = StableProcess(params).cdf
    result = stats.kstest(values, cdf)
    critical = KS_CRITICAL_COEFFICIENT / math.sqrt(n)
    return KSResult(
        float(result.statistic), float(result.pvalue), critical, bool(result.statistic < critical), int(n)
    )


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    pvalue: float
    bins: int
    passed: bool


def sampler_chi2_check(
    params: StableParams, n: int, seed: int, bins: int = 50, substream: int = 0
) -> Chi2Result:
    """Chi-square test of the sampler on equiprobable bins of the tabulated law."""
    process = StableProcess(params)
    edges = np.array([process.ppf(q) for q in np.arange(1, bins) / bins])
    values = sample_stable(params, 1.0, n, seed, substream).values
    observed = np.bincount(np.searchsorted(edges, values), minlength=bins)

    cumulative = np.concatenate([[0.0], process.cdf(edges), [1.0]])
    expected = np.diff(cumulative)
    expected *= n / expected.sum()
    result = stats.chisquare(observed, expected)
    return Chi2Result(
        float(result.statistic), float(result.pvalue), bins, bool(result.pvalue > 0.001)
    )


@dataclass(frozen=True)
class DensityBounds:
    sup: float
    inf: float
    interval: Tuple[float, float]
    t_grid: Tuple[float, ...]


def density_assumption_check(
    params: StableParams,
    interval: Tuple[float, float],
    t_grid: Sequence[float],
    n_points: int = 201,
) -> DensityBounds:
    """Extremes of ``p_t(x)`` over ``t_grid x interval``.

    Bounded densities and a positive lower bound on the interval are the
    density assumptions used by the bounds in :mod:`levysmooth.malliavin`.
    """
    a, b = (float(v) for v in interval)
    if b < a:
        raise SpecValidationError("interval", f"expected a <= b, got [{a}, {b}]")
    if not t_grid or any(not 0 < t <= 1 for t in t_grid):
        raise SpecValidationError("t_grid", "expected times in (0, 1]")
    x = np.linspace(a, b, n_points) if b > a else np.array([a])
    process = StableProcess(params)
    values = np.concatenate([process.pdf(x, t) for t in t_grid])
    return DensityBounds(
        float(values.max()), float(values.min()), (a, b), tuple(float(t) for t in t_grid)
    )


def abs_moment(params: StableParams, p: float, t: float = 1.0) -> float:
    """``E|X_t|^p`` in closed form, ``inf`` for ``p >= beta``."""
    beta = params.beta
    if not -1 < p:
        raise SpecValidationError("p", f"expected p > -1, got {p}")
    if p >= beta:
        return math.inf
    return (
        (t * params.c) ** (p / beta)
        * 2**p
        * special.gamma((1 + p) / 2)
        * special.gamma(1 - p / beta)
        / (math.sqrt(math.pi) * special.gamma(1 - p / 2))
    )
