"""K-functionals and real interpolation norms for two concrete couples.

Function couple ``(B(R), Lip)``: bounded functions with the sup norm and
bounded Lipschitz functions with ``||g||_Lip = ||g||_inf + Lip(g)``. The
interpolation space ``(B(R), Lip)_{alpha, inf}`` is the Hölder space
``C^alpha_b``.

Sequence couple ``(l_2(E), d_{1,2}(E))`` on chaos-like sequences
``a = (a_n)``, described here by ``c_n = ||a_n||^2``:

    ||a||_{l_2} = (sum c_n)^{1/2},  ||a||_{d_{1,2}} = (sum (n + 1) c_n)^{1/2},
    (Ta)(t) = sum c_n t^n.

Every norm is returned as a bracket ``(lower, upper)``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from levysmooth.base import BaseReport, SpecValidationError
from levysmooth.function_space import GridNormEstimator, holder_certificate, norms
from levysmooth.utils import log_trapezoid

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Optional, Sequence, Tuple

    from levysmooth.function_space import FunctionSpec

logger = logging.getLogger(__name__)

HOLDER_RESOLUTION = 64
BRUTE_FORCE_MAX_N = 8
FALLBACK_STEP = 1 / 16


@dataclass(frozen=True)
class KFunctionalEstimate:
    """``lower <= K(a, t) <= upper``; ``witness`` names the decomposition achieving ``upper``."""

    t: float
    lower: float
    upper: float
    witness: str


@dataclass(frozen=True)
class NormBracket(BaseReport):
    theta: float
    q: float
    lower: float
    upper: float

    def contains(self, value: float, tolerance: float = 0.0) -> bool:
        return self.lower - tolerance <= value <= self.upper + tolerance


def _check_t(t: Any) -> float:
    t = float(t)
    if not t > 0:
        raise SpecValidationError("t", f"expected t > 0, got {t}")
    return t


def _check_theta(theta: Any, path: str = "theta") -> float:
    theta = float(theta)
    if not 0 < theta < 1:
        raise SpecValidationError(path, f"expected a value in (0, 1), got {theta}")
    return theta


def _check_q(q: Any) -> float:
    q = float(q)
    if not q >= 1:
        raise SpecValidationError("q", f"expected q in [1, inf], got {q}")
    return q


# Function couple


def _evaluation_span(f: FunctionSpec, t: float) -> Tuple[float, float]:
    if f.period is not None:
        return 0.0, f.period * max(1, math.ceil(t / f.period))
    lo, hi = GridNormEstimator().domain(f)
    return math.floor(lo / t) * t - t, math.ceil(hi / t) * t + t


def k_functional_holder(
    f: FunctionSpec, t: float, resolution: int = HOLDER_RESOLUTION
) -> KFunctionalEstimate:
    """``K(f, t; B(R), Lip)`` bracketed by grid evaluation.

    The upper value uses the piecewise linear interpolant ``f_t`` of f at the
    knots ``t Z``, or the split ``(f, 0)`` when that is cheaper. The lower
    value is half the modulus ``sup_{|x - y| = t} |f(x) - f(y)|``. Sup norms
    are taken on a grid of step ``t / resolution``; periodic functions are
    evaluated over whole periods.
    """
    t = _check_t(t)
    lo, hi = _evaluation_span(f, t)
    n_knots = max(2, int(round((hi - lo) / t)) + 1)
    knots = lo + t * np.arange(n_knots)
    knot_values = f(knots)
    y = lo + (t / resolution) * np.arange((n_knots - 1) * resolution + 1)
    fy = f(y)

    interpolant = np.interp(y, knots, knot_values)
    distance = float(np.max(np.abs(fy - interpolant)))
    lipschitz = float(np.max(np.abs(np.diff(knot_values)))) / t
    sup_interpolant = float(np.max(np.abs(knot_values)))
    interpolated = distance + t * (sup_interpolant + lipschitz)

    sup_f = float(np.max(np.abs(fy)))
    if sup_f <= interpolated:
        upper, witness = sup_f, "(f, 0)"
    else:
        upper, witness = interpolated, f"piecewise linear interpolant on {t:g}Z"

    modulus = float(np.max(np.abs(f(y + t) - fy)))
    return KFunctionalEstimate(t=t, lower=0.5 * modulus, upper=upper, witness=witness)


def default_holder_grid(levels: int = 10) -> np.ndarray:
    return 2.0 ** -np.arange(0, levels + 1)


def interp_norm_holder(
    f: FunctionSpec,
    alpha: float,
    t_grid: Optional[Sequence[float]] = None,
    resolution: int = HOLDER_RESOLUTION,
) -> NormBracket:
    """``(sup t^{-alpha} K_lower, sup t^{-alpha} K_upper)`` over a dyadic grid.

    Shifts ``t >= 1`` contribute at most ``||f||_inf`` through the split
    ``(f, 0)``, which is added to the upper value.
    """
    alpha = _check_theta(alpha, "alpha")
    grid = default_holder_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    estimates = [k_functional_holder(f, t, resolution) for t in grid]
    lower = max(e.t**-alpha * e.lower for e in estimates)
    upper = max(e.t**-alpha * e.upper for e in estimates)
    if grid.max() < 1:
        upper = max(upper, k_functional_holder(f, 1.0, resolution).upper)
    return NormBracket(theta=alpha, q=math.inf, lower=lower, upper=upper)


@dataclass(frozen=True)
class HolderSandwich(BaseReport):
    """Both sides of ``||f||_{C^alpha_b} <= 3 ||f||_interp <= 6 ||f||_{C^alpha_b}``.

    ``holder_norm`` is the certified (upper) Hölder norm and
    ``holder_norm_grid`` its grid (lower) estimate.
    """

    alpha: float
    holder_norm: float
    holder_norm_grid: float
    interp: NormBracket
    max_weighted_upper: float
    lower_side_holds: bool
    upper_side_holds: bool
    weighted_upper_holds: bool

    @property
    def holds(self) -> bool:
        return self.lower_side_holds and self.upper_side_holds and self.weighted_upper_holds


def holder_sandwich_check(
    f: FunctionSpec, alpha: Optional[float] = None, t_grid: Optional[Sequence[float]] = None
) -> HolderSandwich:
    """Evaluates the Hölder sandwich inequalities on the grid brackets.

    Checks ``||f||_{C^alpha_b} <= 3 upper``, ``lower <= 2 ||f||_{C^alpha_b}``
    and ``t^{-alpha} K_upper(t) <= 2 ||f||_{C^alpha_b}`` for every grid
    ``t <= 1``.
    """
    certificate = holder_certificate(f, alpha)
    grid = default_holder_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    bracket = interp_norm_holder(f, certificate.alpha, grid)
    grid_norm = norms(f, certificate.alpha, max_points=2**16).holder_norm
    weighted = max(
        t**-certificate.alpha * k_functional_holder(f, t).upper for t in grid if t <= 1
    )
    report = HolderSandwich(
        alpha=certificate.alpha,
        holder_norm=certificate.norm,
        holder_norm_grid=grid_norm,
        interp=bracket,
        max_weighted_upper=weighted,
        lower_side_holds=grid_norm <= 3 * bracket.upper,
        upper_side_holds=bracket.lower <= 2 * certificate.norm,
        weighted_upper_holds=weighted <= 2 * certificate.norm,
    )
    logger.info(
        f"Hölder sandwich alpha={report.alpha}: interpolation norm in "
        f"[{bracket.lower:.4g}, {bracket.upper:.4g}], Hölder norm {report.holder_norm:.4g}"
    )
    return report


# Sequence couple


@dataclass(frozen=True)
class SequenceElement:
    """Squared norms ``c_n = ||a_n||^2``, ``n = 0 ... N``."""

    c: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = []
        for i, value in enumerate(self.c):
            value = float(value)
            if not (math.isfinite(value) and value >= 0):
                raise SpecValidationError(f"c[{i}]", f"expected a finite value >= 0, got {value}")
            values.append(value)
        object.__setattr__(self, "c", tuple(values))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.arange(1, len(self.c) + 1, dtype=float)

    def scaled(self, factors: np.ndarray) -> SequenceElement:
        """The element ``(s_n a_n)``."""
        return SequenceElement(tuple(np.asarray(factors) ** 2 * self.array))

    @classmethod
    def from_list(cls, values: Sequence[float]) -> SequenceElement:
        return cls(tuple(values))


def seq_l2_norm(a: SequenceElement) -> float:
    return math.sqrt(float(a.array.sum()))


def seq_d12_norm(a: SequenceElement) -> float:
    return math.sqrt(float((a.weights * a.array).sum()))


def seq_T(a: SequenceElement, t: float) -> float:
    """``(Ta)(t) = sum c_n t^n``."""
    t = float(t)
    if not 0 <= t <= 1:
        raise SpecValidationError("t", f"expected a value in [0, 1], got {t}")
    return float(np.polynomial.polynomial.polyval(t, a.array))


def seq_T_derivative(a: SequenceElement, t: float) -> float:
    """``(Ta)'(t) = sum n c_n t^{n-1}``."""
    t = float(t)
    if not 0 <= t <= 1:
        raise SpecValidationError("t", f"expected a value in [0, 1], got {t}")
    derivative = np.polynomial.polynomial.polyder(a.array) if len(a.c) > 1 else [0.0]
    return float(np.polynomial.polynomial.polyval(t, derivative))


def _split_objective(c: np.ndarray, w: np.ndarray, t: float, s: np.ndarray) -> np.ndarray:
    """``sqrt(sum s^2 c) + t sqrt(sum (1 - s)^2 w c)``, vectorised over rows of ``s``."""
    first = np.sqrt(np.sum(s**2 * c, axis=-1))
    second = np.sqrt(np.sum((1 - s) ** 2 * w * c, axis=-1))
    return first + t * second


def _seq_k_lower(a: SequenceElement, t: float) -> float:
    return math.sqrt(float(np.sum(np.minimum(1.0, t * t * a.weights) * a.array)) / 2)


def seq_k_functional(a: SequenceElement, t: float) -> KFunctionalEstimate:
    """``K(a, t; l_2, d_{1,2})``.

    Stationary splits of the convex objective lie on the family
    ``s_n = lam w_n / (1 + lam w_n)`` with ``lam = t A / B``, ``A`` and ``B``
    the two norms of the split. The multiplier ``lam`` is found by root
    finding; the endpoints ``(a, 0)`` and ``(0, a)`` cover the cases without
    an interior root. The lower value is
    ``(sum min(1, t^2 (n+1)) c_n / 2)^{1/2}``.
    """
    t = _check_t(t)
    c, w = a.array, a.weights
    lower = _seq_k_lower(a, t)
    l2, d12 = seq_l2_norm(a), t * seq_d12_norm(a)
    if l2 == 0:
        return KFunctionalEstimate(t, 0.0, 0.0, "zero")

    candidates = [(l2, "(a, 0)"), (d12, "(0, a)")]

    def split(u: float) -> np.ndarray:
        lam = math.exp(u)
        return lam * w / (1 + lam * w)

    def stationarity(u: float) -> float:
        # lam (1 - s_n) = 1 / (1/lam + w_n)
        scaled_rest = 1 / (math.exp(-u) + w)
        first = math.sqrt(float(np.sum(split(u) ** 2 * c)))
        return math.sqrt(float(np.sum(scaled_rest**2 * w * c))) - t * first

    u_lo, u_hi = -60.0, 60.0
    if stationarity(u_lo) * stationarity(u_hi) < 0:
        try:
            root = optimize.brentq(stationarity, u_lo, u_hi, xtol=1e-13, rtol=1e-14)
            value = float(_split_objective(c, w, t, split(root)))
            candidates.append((value, f"colinear split, multiplier {math.exp(root):.6g}"))
        except (RuntimeError, ValueError) as e:
            logger.warning(f"Multiplier search failed at t={t}: {e}; using grid search")
            step = FALLBACK_STEP if len(c) <= 4 else 0.25
            value, _ = seq_k_bruteforce(a, t, step=step, polish=False)
            candidates.append((value, f"grid search, resolution {step:g}"))

    upper, witness = min(candidates)
    return KFunctionalEstimate(t=t, lower=min(lower, upper), upper=upper, witness=witness)


def seq_k_bruteforce(
    a: SequenceElement, t: float, step: float = 0.25, polish: bool = True
) -> Tuple[float, np.ndarray]:
    """Grid search of the split ``s`` over ``{0, step, ..., 1}^{N+1}``.

    The best lattice point is polished by a bounded quasi-Newton run in the
    full split space. Used as an independent oracle for
    :func:`seq_k_functional`.

    Returns:
        The minimal value and the split achieving it.
    """
    t = _check_t(t)
    c, w = a.array, a.weights
    if len(c) > BRUTE_FORCE_MAX_N + 1:
        raise SpecValidationError("a", f"grid search is limited to N <= {BRUTE_FORCE_MAX_N}")
    levels = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    lattice = np.array(list(itertools.product(levels, repeat=len(c))))
    values = _split_objective(c, w, t, lattice)
    best = lattice[int(np.argmin(values))]
    if not polish:
        return float(values.min()), best

    result = optimize.minimize(
        lambda s: float(_split_objective(c, w, t, s)),
        best,
        method="L-BFGS-B",
        bounds=[(0.0, 1.0)] * len(c),
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000},
    )
    if result.fun < values.min():
        return float(result.fun), result.x
    return float(values.min()), best


def default_sequence_grid() -> np.ndarray:
    """``t = 2^{k/4}`` for ``|k| <= 80``."""
    return 2.0 ** (np.arange(-80, 81) / 4)


def _bracket_from_k(
    t: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    theta: float,
    q: float,
    a0_norm: float,
    a1_norm: float,
) -> Tuple[float, float]:
    """Rigorous bracket of ``||t^{-theta} K(t)||_{L_q(dt/t)}`` from grid values.

    Between consecutive grid points K is nondecreasing; outside the grid
    ``K(s) <= s ||a||_{A_1}`` for small ``s`` and ``K(s) <= ||a||_{A_0}`` for
    large ``s``.
    """
    left, right = t[:-1], t[1:]
    inner_lower = right**-theta * lower[:-1]
    inner_upper = left**-theta * upper[1:]
    small_tail = t[0] ** (1 - theta) * a1_norm
    large_tail = t[-1] ** -theta * a0_norm
    if math.isinf(q):
        low = float(np.max(t**-theta * lower))
        high = float(max(inner_upper.max(), small_tail, large_tail))
        return low, high
    steps = np.log(right / left)
    low = float(np.sum(inner_lower**q * steps)) ** (1 / q)
    high_q = (
        np.sum(inner_upper**q * steps)
        + small_tail**q / ((1 - theta) * q)
        + large_tail**q / (theta * q)
    )
    return low, float(high_q) ** (1 / q)


def seq_interp_norm(
    a: SequenceElement,
    theta: float,
    q: float = math.inf,
    t_grid: Optional[Sequence[float]] = None,
) -> NormBracket:
    """``||a||_{(l_2, d_{1,2})_{theta, q}}`` bracketed on a logarithmic grid."""
    theta, q = _check_theta(theta), _check_q(q)
    t = default_sequence_grid() if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    estimates = [seq_k_functional(a, s) for s in t]
    lower = np.array([e.lower for e in estimates])
    upper = np.array([e.upper for e in estimates])
    low, high = _bracket_from_k(t, lower, upper, theta, q, seq_l2_norm(a), seq_d12_norm(a))
    return NormBracket(theta=theta, q=q, lower=low, upper=high)


@dataclass(frozen=True)
class GeissHujoReport(BaseReport):
    """Interpolation norm against ``||a||_{l_2} + ||(1-t)^{-theta/2} ((Ta)(1) - (Ta)(t))^{1/2}||``.

    ``derivative_expression`` is the variant built from
    ``(1-t)^{(1-theta)/2} (Ta)'(t)^{1/2}``.
    """

    theta: float
    q: float
    interp: NormBracket
    t_expression: float
    derivative_expression: float
    ratio: float
    ratio_lower: float
    ratio_upper: float
    window: float = 10.0

    @property
    def within_window(self) -> bool:
        return 1 / self.window <= self.ratio <= self.window


def default_gh_grid() -> np.ndarray:
    """``1 - t = 2^-k``, ``k = 0 ... 40``."""
    return 1 - 2.0 ** -np.arange(0, 41)


def _lq_dt_over_one_minus_t(t: np.ndarray, values: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(values))
    return log_trapezoid(1 - t, values**q) ** (1 / q)


def geiss_hujo_check(
    a: SequenceElement,
    theta: float,
    q: float = math.inf,
    t_grid: Optional[Sequence[float]] = None,
    window: float = 10.0,
) -> Optional[GeissHujoReport]:
    """Compares the interpolation norm with its expression through ``T``.

    Returns None for ``a = 0``.
    """
    theta, q = _check_theta(theta), _check_q(q)
    if seq_l2_norm(a) == 0:
        return None
    t = default_gh_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    total = seq_T(a, 1.0)
    difference = np.array([max(total - seq_T(a, s), 0.0) for s in t])
    derivative = np.array([seq_T_derivative(a, s) for s in t])
    l2 = seq_l2_norm(a)
    expression = l2 + _lq_dt_over_one_minus_t(t, (1 - t) ** (-theta / 2) * np.sqrt(difference), q)
    derivative_expression = l2 + _lq_dt_over_one_minus_t(
        t, (1 - t) ** ((1 - theta) / 2) * np.sqrt(derivative), q
    )
    bracket = seq_interp_norm(a, theta, q)
    report = GeissHujoReport(
        theta=theta,
        q=q,
        interp=bracket,
        t_expression=expression,
        derivative_expression=derivative_expression,
        ratio=expression / math.sqrt(bracket.lower * bracket.upper),
        ratio_lower=expression / bracket.upper,
        ratio_upper=expression / bracket.lower,
        window=window,
    )
    logger.info(f"T-expression {expression:.4g}, interpolation norm ratio {report.ratio:.4g}")
    return report


@dataclass(frozen=True)
class ReiterationReport(BaseReport):
    """Bracket of ``||a||_{(A_0, (A_0, A_1)_{eta, inf})_{theta, inf}} / ||a||_{(A_0, A_1)_{eta theta, inf}}``."""

    eta: float
    theta: float
    direct: NormBracket
    reiterated_lower: float
    reiterated_upper: float
    ratio_lower: float
    ratio_upper: float
    candidates: int

    @property
    def intersects(self) -> bool:
        """Whether the ratio bracket meets ``[1, 3]``."""
        return self.ratio_lower <= 3 and self.ratio_upper >= 1


def _reiteration_candidates(a: SequenceElement, step: float) -> np.ndarray:
    """Colinear splits: a lattice, the optimal family of the couple and coordinate cut-offs."""
    n = len(a.c)
    levels = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    lattice = list(itertools.product(levels, repeat=n))
    w = a.weights
    family = [tuple(lam * w / (1 + lam * w)) for lam in 2.0 ** np.arange(-20, 21)]
    cutoffs = [tuple(np.where(np.arange(n) >= m, 1.0, 0.0)) for m in range(n + 1)]
    return np.unique(np.array(lattice + family + cutoffs), axis=0)


def reiteration_check(
    a: SequenceElement,
    eta: float,
    theta: float,
    t_grid: Optional[Sequence[float]] = None,
    step: float = 0.5,
) -> Optional[ReiterationReport]:
    """Brackets the reiterated norm against the direct ``(eta theta, inf)`` norm.

    The reiterated K-functional
    ``K(a, t; A_0, (A_0, A_1)_{eta, inf})`` is searched over colinear splits
    ``a = s a + (1 - s) a``; the intermediate norm of every candidate
    ``(1 - s) a`` is itself a bracket from :func:`seq_interp_norm`. Returns
    None for ``a = 0``.
    """
    eta, theta = _check_theta(eta, "eta"), _check_theta(theta)
    if len(a.c) > BRUTE_FORCE_MAX_N + 1:
        raise SpecValidationError("a", f"decomposition search is limited to N <= {BRUTE_FORCE_MAX_N}")
    if seq_l2_norm(a) == 0:
        return None

    coarse = 2.0 ** (np.arange(-40, 41) / 2)
    direct = seq_interp_norm(a, eta * theta, math.inf, coarse)

    splits = _reiteration_candidates(a, step)
    first = np.sqrt(np.sum(splits**2 * a.array, axis=1))
    middle_lower, middle_upper = np.empty(len(splits)), np.empty(len(splits))
    for i, s in enumerate(splits):
        remainder = a.scaled(1 - s)
        if seq_l2_norm(remainder) == 0:
            middle_lower[i] = middle_upper[i] = 0.0
            continue
        bracket = seq_interp_norm(remainder, eta, math.inf, coarse)
        middle_lower[i], middle_upper[i] = bracket.lower, bracket.upper

    t = coarse if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    k_lower = np.min(first[None, :] + t[:, None] * middle_lower[None, :], axis=1)
    k_upper = np.min(first[None, :] + t[:, None] * middle_upper[None, :], axis=1)
    # the split (0, a) bounds K(t) by t ||a||_eta and (a, 0) by ||a||_{l_2}
    intermediate = seq_interp_norm(a, eta, math.inf, coarse).upper
    lower, upper = _bracket_from_k(
        t, k_lower, k_upper, theta, math.inf, seq_l2_norm(a), intermediate
    )
    report = ReiterationReport(
        eta=eta,
        theta=theta,
        direct=direct,
        reiterated_lower=lower,
        reiterated_upper=upper,
        ratio_lower=lower / direct.upper,
        ratio_upper=upper / direct.lower,
        candidates=len(splits),
    )
    logger.info(
        f"Reiteration eta={eta}, theta={theta}: ratio in "
        f"[{report.ratio_lower:.4g}, {report.ratio_upper:.4g}] over {len(splits)} splits"
    )
    return report


@dataclass(frozen=True)
class EmbeddingReport(BaseReport):
    """``||a||_{eta, inf} <= ||a||_{theta, inf} <= ||a||_{d_{1,2}}`` for ``eta < theta``."""

    eta: float
    theta: float
    eta_norm: NormBracket
    theta_norm: NormBracket
    d12_norm: float
    ordered: bool
    below_d12: bool


def embedding_check(
    a: SequenceElement,
    theta: float,
    eta: float,
    t_grid: Optional[Sequence[float]] = None,
) -> EmbeddingReport:
    """Checks the embeddings ``d_{1,2} in (theta, inf) in (eta, inf)`` on brackets."""
    theta, eta = _check_theta(theta), _check_theta(eta, "eta")
    if not eta < theta:
        raise SpecValidationError("eta", f"expected eta < theta, got {eta} >= {theta}")
    eta_norm = seq_interp_norm(a, eta, math.inf, t_grid)
    theta_norm = seq_interp_norm(a, theta, math.inf, t_grid)
    d12 = seq_d12_norm(a)
    return EmbeddingReport(
        eta=eta,
        theta=theta,
        eta_norm=eta_norm,
        theta_norm=theta_norm,
        d12_norm=d12,
        ordered=eta_norm.lower <= theta_norm.upper,
        below_d12=theta_norm.lower <= d12,
    )
