"""Fractional smoothness of f(X_1) through the statistic

    Psi(t) = 1/2 E (f(X_1) - f(X_t + X'_{1-t}))^2,

where ``X'`` is an independent copy of the process. ``Psi`` decays like a
power of ``1 - t`` and the exponent of that power measures the position of
``f(X_1)`` between L_2 and D_{1,2}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate

from levysmooth.base import BaseReport, InsufficientDataError, SpecValidationError
from levysmooth.function_space import (
    NBVMixture,
    holder_certificate,
    smoothing_decomposition,
)
from levysmooth.levy_model import moment
from levysmooth.malliavin import d12_norm_sq
from levysmooth.stable_process import (
    CompoundPoissonProcess,
    StableParams,
    StableProcess,
    abs_moment,
)
from levysmooth.utils import growth_diverges, log_trapezoid, run_tasks

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, List, Optional, Sequence, Tuple

    from levysmooth.function_space import FunctionSpec
    from levysmooth.levy_model import LevyMeasureSpec
    from levysmooth.stable_process import Process

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
MAX_GRID_POINT = 1 - 1e-4
USABLE_RELATIVE_ERROR = 0.1
MIN_FIT_POINTS = 4
GROWTH_RULE = "growing if the last three grid points each increase by at least 10%"


def default_t_grid(levels: int = 10) -> np.ndarray:
    """``1 - t`` in ``{2^-1, ..., 2^-levels}``."""
    return 1 - 2.0 ** -np.arange(1, levels + 1)


def _check_t(t: Any, path: str = "t") -> float:
    t = float(t)
    if not 0 <= t < 1:
        raise SpecValidationError(path, f"expected a value in [0, 1), got {t}")
    return t


def _check_grid(t_grid: Any) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise SpecValidationError("t_grid", "expected a non-empty list")
    if np.any(grid < 0) or np.any(grid > MAX_GRID_POINT):
        raise SpecValidationError("t_grid", f"expected values in [0, {MAX_GRID_POINT}]")
    if np.any(np.diff(grid) <= 0):
        raise SpecValidationError("t_grid", "expected an increasing grid")
    return grid


@dataclass(frozen=True)
class PsiValue:
    t: float
    psi: float
    stderr: float


def psi(
    f: FunctionSpec,
    process: Process,
    t: float,
    n: int = 10**6,
    seed: int = 0,
    substream: int = 0,
) -> PsiValue:
    """Monte Carlo estimate of ``Psi(t)``.

    ``X_1`` is built as ``X_t + D`` with ``D`` an independent draw of
    ``X_{1-t}``, so that ``X_t`` is shared with the second argument
    ``X_t + X'_{1-t}``. The three draws use the substreams ``3 substream``,
    ``3 substream + 1`` and ``3 substream + 2``.

    Args:
        f: The function.
        process: Stable or compound Poisson process.
        t: Time in ``[0, 1)``.
        n: Number of joint draws.
        seed: Master seed.
        substream: Grid point index.

    Returns:
        The estimate and its standard error.
    """
    t = _check_t(t)
    if int(n) < MIN_SAMPLES:
        raise SpecValidationError("n", f"expected n >= {MIN_SAMPLES}, got {n}")
    n = int(n)
    base = 3 * substream
    shared = process.sample(t, n, seed, base).values if t > 0 else np.zeros(n)
    increment = process.sample(1 - t, n, seed, base + 1).values
    copy = process.sample(1 - t, n, seed, base + 2).values
    values = 0.5 * (f(shared + increment) - f(shared + copy)) ** 2
    return PsiValue(t, float(values.mean()), float(values.std() / math.sqrt(n)))


@dataclass(frozen=True)
class PsiCurve(BaseReport):
    t_grid: List[float]
    psi: List[float]
    stderr: List[float]
    n_samples: int
    seed: int

    def rows(self) -> List[Tuple[float, float, float, int]]:
        return [
            (t, value, error, self.n_samples)
            for t, value, error in zip(self.t_grid, self.psi, self.stderr)
        ]


def psi_curve(
    f: FunctionSpec,
    process: Process,
    t_grid: Optional[Sequence[float]] = None,
    n: int = 10**6,
    seed: int = 0,
    n_workers: Optional[int] = None,
) -> PsiCurve:
    """``Psi`` on a grid, one disjoint substream per grid point."""
    grid = _check_grid(default_t_grid() if t_grid is None else t_grid)
    logger.info(f"Estimating Psi on {grid.size} grid points with n={n}")
    values = run_tasks(
        psi, [(f, process, t, n, seed, k) for k, t in enumerate(grid)], n_workers
    )
    return PsiCurve(
        t_grid=[float(t) for t in grid],
        psi=[v.psi for v in values],
        stderr=[v.stderr for v in values],
        n_samples=int(n),
        seed=int(seed),
    )


@dataclass(frozen=True)
class SmoothnessFit(BaseReport):
    """Weighted log-log fit ``log Psi = intercept + slope log(1 - t)``.

    ``theta_max`` is the slope capped just below 1: interpolation
    parameters up to it are consistent with the observed decay.
    """

    slope: float
    intercept: float
    r_squared: float
    theta_max: float
    half_width: float
    n_points: int
    log_correction: bool = False


def fit_exponent(curve: PsiCurve, log_correction: bool = False) -> SmoothnessFit:
    """Fits the decay exponent of ``Psi`` in ``1 - t``.

    Only points with ``stderr / psi <= 0.1`` are used. With
    ``log_correction``, ``Psi`` is first divided by ``log(2 / (1 - t))``,
    which removes the logarithmic factor appearing when ``E|X_1|`` is
    infinite at the boundary index.

    Raises:
        InsufficientDataError: Fewer than 4 usable points.
    """
    t = np.asarray(curve.t_grid, dtype=float)
    values = np.asarray(curve.psi, dtype=float)
    errors = np.asarray(curve.stderr, dtype=float)
    usable = (values > 0) & (errors <= USABLE_RELATIVE_ERROR * values)
    if usable.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"insufficient decay data: {usable.sum()} usable points, {MIN_FIT_POINTS} required"
        )
    t, values, errors = t[usable], values[usable], errors[usable]

    x = np.log(1 - t)
    y = np.log(values)
    if log_correction:
        y = y - np.log(np.log(2 / (1 - t)))
    # the relative error of Psi is the absolute error of log Psi
    if np.all(errors > 0):
        weights = values / errors
        coefficients, cov = np.polyfit(x, y, 1, w=weights, cov="unscaled")
    else:
        weights = np.ones_like(x)
        coefficients, cov = np.polyfit(x, y, 1, cov=True)
    slope, intercept = (float(c) for c in coefficients)

    residuals = y - (slope * x + intercept)
    w2 = weights**2
    mean = np.sum(w2 * y) / np.sum(w2)
    total = np.sum(w2 * (y - mean) ** 2)
    r_squared = 1.0 - float(np.sum(w2 * residuals**2) / total) if total > 0 else 1.0

    fit = SmoothnessFit(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        theta_max=min(slope, float(np.nextafter(1.0, 0.0))),
        half_width=1.96 * math.sqrt(max(float(cov[0, 0]), 0.0)),
        n_points=int(usable.sum()),
        log_correction=log_correction,
    )
    logger.info(f"Fitted decay exponent {fit.slope:.4f} +- {fit.half_width:.4f}")
    return fit


@dataclass(frozen=True)
class MembershipStat(BaseReport):
    theta: float
    sup_stat: float
    verdict: str
    rule: str = GROWTH_RULE


def membership_statistic(curve: PsiCurve, theta: float) -> MembershipStat:
    """``sup (1 - t)^{-theta} Psi(t)`` over the grid, with a growth verdict."""
    theta = float(theta)
    if not 0 < theta < 1:
        raise SpecValidationError("theta", f"expected a value in (0, 1), got {theta}")
    t = np.asarray(curve.t_grid, dtype=float)
    stat = (1 - t) ** -theta * np.asarray(curve.psi, dtype=float)
    growing = len(stat) >= 3 and all(
        stat[k] > 0 and stat[k + 1] >= 1.1 * stat[k] for k in (-3, -2)
    )
    if growing:
        logger.warning(f"Membership statistic for theta={theta} grows on the finest points")
    return MembershipStat(
        theta=theta,
        sup_stat=float(stat.max()) if stat.size else 0.0,
        verdict="growing" if growing else "bounded-on-grid",
    )


def _exceedance_probability(process: Process, level: float, t: float) -> float:
    """``P(|X_t| > level)`` for a symmetric process."""
    if isinstance(process, StableProcess):
        return float(2 * process.sf(level, t))
    support, probs = process.law(t)
    return float(probs[np.abs(support) > level].sum())


def _is_symmetric(process: Process) -> bool:
    if isinstance(process, StableProcess):
        return True
    atoms = sorted(process.params.atoms)
    mirrored = sorted((-x, lam) for x, lam in atoms)
    return np.allclose(np.asarray(atoms), np.asarray(mirrored))


@dataclass(frozen=True)
class ExceedanceReport(BaseReport):
    """Partial sums of ``int_{t0 2^-k}^{t0} P(|X_t| > c t^{1/beta'}) dt/t``."""

    beta_prime: float
    c: float
    t0: float
    integral: float
    partials: List[float]
    finite: bool
    grid: List[float] = field(default_factory=list, repr=False)
    probabilities: List[float] = field(default_factory=list, repr=False)


def small_time_exceedance(
    process: Process,
    beta_prime: float,
    c: float = 1.0,
    t0: float = 1.0,
    grid: Optional[Sequence[float]] = None,
) -> ExceedanceReport:
    """Small-time probe ``int_0^{t0} P(|X_t| / t^{1/beta'} > c) dt / t``.

    The integral converges when ``beta'`` dominates the small-time index of
    the process. Stable probabilities use the scaling
    ``P(|X_t| > c t^{1/beta'}) = P(|X_1| > c t^{1/beta' - 1/beta})``.

    Args:
        process: A symmetric process.
        beta_prime: Probe exponent in ``(0, 2]``.
        c: Level.
        t0: Upper integration bound.
        grid: Decreasing times starting at ``t0``; dyadic ``t0 2^-k`` for
            ``k <= 40`` by default.

    Returns:
        The report, whose partials are taken at depths 5, 10, 20 and 40.
    """
    beta_prime = float(beta_prime)
    if not 0 < beta_prime <= 2:
        raise SpecValidationError("beta_prime", f"expected a value in (0, 2], got {beta_prime}")
    if not c > 0:
        raise SpecValidationError("c", f"expected c > 0, got {c}")
    if not t0 > 0:
        raise SpecValidationError("t0", f"expected t0 > 0, got {t0}")
    if not _is_symmetric(process):
        raise SpecValidationError("process", "small-time probes need a symmetric process")

    t = t0 * 2.0 ** -np.arange(0, 41) if grid is None else np.asarray(grid, dtype=float)
    if isinstance(process, StableProcess):
        exponent = 1 / beta_prime - 1 / process.params.beta
        probabilities = np.array(
            [2 * float(process.sf(c * s**exponent)) for s in t]
        )
    else:
        probabilities = np.array(
            [_exceedance_probability(process, c * s ** (1 / beta_prime), s) for s in t]
        )

    depths = [d for d in (5, 10, 20, 40) if d < t.size]
    partials = [log_trapezoid(t[: d + 1], probabilities[: d + 1]) for d in depths]
    integral = log_trapezoid(t, probabilities)
    finite = not growth_diverges(partials)
    logger.info(
        f"Small-time probe beta'={beta_prime}: partials {[f'{p:.4g}' for p in partials]}"
    )
    return ExceedanceReport(
        beta_prime=beta_prime,
        c=float(c),
        t0=float(t0),
        integral=integral if finite else math.inf,
        partials=partials,
        finite=finite,
        grid=t.tolist(),
        probabilities=probabilities.tolist(),
    )


def _window_l2(func: Any, process: StableProcess, cuts: Sequence[float]) -> float:
    """``E func(X_1)^2`` for a function vanishing outside ``[cuts[0], cuts[-1]]``."""
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            value, _ = integrate.quad(
                lambda y: float(func(y)) ** 2 * float(process.pdf(y)), a, b, limit=200
            )
            total += value
    return total


@dataclass(frozen=True)
class BVInterpReport(BaseReport):
    """``sup_t t^{-theta} (||(f - f_t)(X_1)||_2 + t ||f_t(X_1)||_{D_{1,2}})`` on a grid."""

    theta: float
    sup: float
    constant: float
    rows: List[Tuple[float, float, float, float]]

    @property
    def holds(self) -> bool:
        return self.sup <= self.constant


def bv_interp_upper(
    mixture: NBVMixture,
    theta: float,
    process: StableProcess,
    t_grid: Optional[Sequence[float]] = None,
    n_workers: Optional[int] = None,
) -> BVInterpReport:
    """Upper bound of the ``(L_2, D_{1,2})_{theta, inf}`` norm of ``f(X_1)`` for f of bounded variation.

    For each ``t`` the function is split with the smoothing kernel of
    :func:`smoothing_decomposition`; the remainder is measured in ``L_2`` by
    density quadrature and the smooth part in ``D_{1,2}``. The reference
    constant is ``(sqrt(sup p_1) + sqrt(1 + 2 (sup p_1 v 1) m_{1/theta})) ||f||_BV``.

    Args:
        mixture: The function.
        theta: Interpolation parameter in ``[1/2, 1)``.
        process: Stable process.
        t_grid: Values of ``t`` in ``(0, 1)``, ``2^-1 ... 2^-8`` by default.
        n_workers: Workers of the D_{1,2} shells.
    """
    if not isinstance(process, StableProcess):
        raise SpecValidationError("process", "a bounded density is required")
    grid = 2.0 ** -np.arange(1, 9) if t_grid is None else np.asarray(t_grid, dtype=float)
    measure = process.levy_measure()
    m = moment(measure, 1 / float(theta))
    p_sup = process.p_sup
    constant = (
        math.sqrt(p_sup) + math.sqrt(1 + 2 * max(p_sup, 1.0) * m.value)
    ) * mixture.total_variation

    rows = []
    for t in grid:
        decomposition = smoothing_decomposition(mixture, theta, float(t))
        cuts = sorted(set(decomposition.smoothed.breakpoints))
        remainder = math.sqrt(_window_l2(decomposition.remainder, process, cuts))
        smooth = d12_norm_sq(decomposition.smoothed, process, n_workers=n_workers)
        d12 = math.sqrt(smooth.d12_norm_sq)
        value = t**-decomposition.theta * (remainder + t * d12)
        logger.info(f"t={t:.4g}: remainder {remainder:.4g}, smooth part {d12:.4g}")
        rows.append((float(t), remainder, d12, float(value)))

    return BVInterpReport(
        theta=float(theta),
        sup=max(row[3] for row in rows),
        constant=constant,
        rows=rows,
    )


def indicator_psi_exact(process: Process, K: float, t: float) -> float:
    """``Psi(t)`` of ``1_{[K, inf)}`` without sampling.

    ``Psi(t) = int P(X_t in dy) q(y) (1 - q(y))`` with
    ``q(y) = P(X_{1-t} >= K - y)``.
    """
    t = _check_t(t)
    K = float(K)
    if isinstance(process, CompoundPoissonProcess):
        tail_support, tail_probs = process.law(1 - t)

        def q(y: float) -> float:
            return float(tail_probs[tail_support >= K - y].sum())

        if t == 0:
            return q(0.0) * (1 - q(0.0))
        support, probs = process.law(t)
        return float(sum(p * q(y) * (1 - q(y)) for y, p in zip(support, probs)))

    if t == 0:
        return float(process.cdf(K) * process.sf(K))
    # y = K - sigma_{1-t} w
    sigma = process.scale(1 - t)

    def integrand(w: float) -> float:
        return float(
            process.pdf(K - sigma * w, t) * sigma * process.law.cdf(w) * process.law.sf(w)
        )

    left, _ = integrate.quad(integrand, -np.inf, 0.0, limit=400)
    right, _ = integrate.quad(integrand, 0.0, np.inf, limit=400)
    return left + right


def _difference_law(process: StableProcess) -> StableParams:
    """``X_1 - X'_1`` is stable with twice the scale parameter ``c``."""
    params = process.params
    return StableParams(beta=params.beta, c=2 * params.c)


def stable_holder_psi_bound(
    f: FunctionSpec, process: StableProcess, t: float, alpha: Optional[float] = None
) -> float:
    """``2 (1-t)^{2 alpha / beta} ||f||^2_{C^alpha_b} E|X_1 - X'_1|^{2 alpha}``.

    Infinite unless ``beta > 2 alpha``.
    """
    t = _check_t(t)
    certificate = holder_certificate(f, alpha)
    beta = process.params.beta
    moment_value = abs_moment(_difference_law(process), 2 * certificate.alpha)
    if not math.isfinite(moment_value):
        return math.inf
    return 2 * (1 - t) ** (2 * certificate.alpha / beta) * certificate.norm**2 * moment_value


def stable_bv_psi_bound(mixture: NBVMixture, process: StableProcess, t: float) -> float:
    """``(1-t)^{1/beta} t^{-1/beta} ||f||^2_BV sup p_1 E|X_1 - X'_1|`` for ``beta > 1``."""
    t = _check_t(t)
    beta = process.params.beta
    if not beta > 1:
        raise SpecValidationError("process.beta", f"expected beta > 1, got {beta}")
    if t == 0:
        return math.inf
    first = abs_moment(_difference_law(process), 1.0)
    return (
        ((1 - t) / t) ** (1 / beta)
        * mixture.total_variation**2
        * process.p_sup
        * first
    )


def holder_interp_constant(alpha: float, theta: float, measure: LevyMeasureSpec) -> float:
    """``18 sqrt(1 + 4 m_{2 alpha / theta})``, infinite when the moment diverges.

    Bounds ``||f(X_1)||_{(L_2, D_{1,2})_{theta, inf}}`` by this constant times
    ``||f||_{C^alpha_b}``.
    """
    m = moment(measure, 2 * float(alpha) / float(theta))
    if not m.finite:
        return math.inf
    return 18 * math.sqrt(1 + 4 * m.value)
