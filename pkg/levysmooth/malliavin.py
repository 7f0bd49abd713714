"""Malliavin Sobolev norm of f(X_1) for pure-jump Lévy processes.

The norm is computed from the difference-quotient representation

    ||f(X_1)||^2_{D_{1,2}} = E f(X_1)^2 + int G(x) nu(dx),
    G(x) = E (f(X_1 + x) - f(X_1))^2,

where the outer integral runs over dyadic shells ``2^j <= |x| <= 2^{j+1}``.
Close to the origin, where raw values of G are either noisy or
indistinguishable from zero, the integral is bracketed: the raw shells give
the lower bracket and the small-shift envelope of G (Hölder or variation
based) closes the upper bracket.

The module also holds the explicit upper and lower bounds on the norm and
the compound Poisson membership criteria.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate, special, stats

from levysmooth.base import BaseReport, LevySmoothError, SpecValidationError
from levysmooth.function_space import (
    Ciesielski,
    Constant,
    Custom,
    Indicator,
    NBVMixture,
    PowerCap,
    SmoothedIndicator,
    holder_certificate,
    norms,
    powercap_regime_bound,
)
from levysmooth.levy_model import (
    FiniteDiscrete,
    GenericDensity,
    SymmetricStable,
    moment,
    truncated_abs_moment,
)
from levysmooth.stable_process import (
    CompoundPoissonParams,
    CompoundPoissonProcess,
    StableProcess,
    sample_cpp,
)
from levysmooth.utils import gauss_legendre, growth_diverges, run_tasks

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

    from levysmooth.function_space import FunctionSpec
    from levysmooth.levy_model import LevyMeasureSpec
    from levysmooth.stable_process import Process

logger = logging.getLogger(__name__)

DENSITY = "density"
MONTE_CARLO = "mc"
MODES = (DENSITY, MONTE_CARLO)

MEMBER = "member"
NOT_MEMBER = "not-member-numerically"

# single-shell refinements at the deep end fed to the growth heuristic
DEEP_REFINEMENTS = 3


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise SpecValidationError("mode", f"expected one of {MODES}, got {mode!r}")
    return mode


def sup_norm_bound(f: FunctionSpec) -> float:
    """A bound on ``sup|f|``, exact for every catalogue entry but Custom."""
    if isinstance(f, Constant):
        return abs(f.value)
    if isinstance(f, (Indicator, PowerCap)):
        return 1.0
    if isinstance(f, NBVMixture):
        return f.sup_norm
    if isinstance(f, Ciesielski):
        return f.sup_bound
    if isinstance(f, SmoothedIndicator):
        return f.mixture.total_variation
    return norms(f, max_points=2**16).sup_norm.value


def _bv_norm(f: FunctionSpec) -> Optional[float]:
    if isinstance(f, Indicator):
        return 1.0
    if isinstance(f, NBVMixture):
        return f.total_variation
    if isinstance(f, SmoothedIndicator):
        return f.mixture.total_variation
    return None


@dataclass(frozen=True)
class SmallShiftEnvelope:
    """``G(x) <= constant |x|^exponent`` for ``|x| <= 1``."""

    constant: float
    exponent: float
    source: str

    def __call__(self, x: Any) -> np.ndarray:
        return self.constant * np.abs(np.asarray(x, dtype=float)) ** self.exponent

    def integral(self, measure: LevyMeasureSpec, r: float) -> float:
        """``int_{0 < |x| <= r} constant |x|^exponent nu(dx)``."""
        if self.constant == 0:
            return 0.0
        return self.constant * truncated_abs_moment(measure, self.exponent, r)


def small_shift_envelope(f: FunctionSpec, process: Process) -> Optional[SmallShiftEnvelope]:
    """The best known envelope of ``G`` near the origin, or None.

    Hölder functions satisfy ``G(x) <= [f]_alpha^2 |x|^{2 alpha}``; power caps
    with ``alpha < 1/2`` under a bounded density satisfy a sharper
    ``|x|^{2 alpha + 1}`` envelope; functions of bounded variation satisfy
    ``G(x) <= ||f||_BV^2 (1 v sup p_1) |x|``.
    """
    if isinstance(f, Constant):
        return SmallShiftEnvelope(0.0, 1.0, "constant")
    if isinstance(f, PowerCap) and f.alpha < 0.5 and isinstance(process, StableProcess):
        constant = powercap_regime_bound(f.alpha, 1.0, process.p_sup)
        return SmallShiftEnvelope(constant, 2 * f.alpha + 1, "power-cap")
    if isinstance(f, (Ciesielski, PowerCap)):
        certificate = holder_certificate(f)
        return SmallShiftEnvelope(certificate.seminorm**2, 2 * f.alpha, "holder")
    bv = _bv_norm(f)
    if bv is not None and isinstance(process, StableProcess):
        return SmallShiftEnvelope(bv**2 * max(1.0, process.p_sup), 1.0, "bounded-variation")
    return None


def small_shift_floor(f: FunctionSpec, process: Process) -> Optional[SmallShiftEnvelope]:
    """A lower envelope ``G(x) >= constant |x|`` for ``|x| <= 1``, or None.

    For ``1_{[K, inf)}`` under a stable law, ``G(x)`` is the mass of an
    interval of length ``|x|`` next to ``K``, and the unimodal density is at
    least ``p_1(|K| + 1)`` on ``[K - 1, K + 1]``.
    """
    if isinstance(f, Indicator) and isinstance(process, StableProcess):
        return SmallShiftEnvelope(float(process.pdf(abs(f.K) + 1.0)), 1.0, "indicator")
    return None


def _one_sided_densities(
    measure: LevyMeasureSpec, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Densities of ``nu`` at ``x`` and ``-x`` for ``x > 0``."""
    if isinstance(measure, GenericDensity):
        return measure.density(x), measure.density(-x)
    half = 0.5 * measure.two_sided_density(x)
    return half, half


@dataclass(frozen=True)
class DisplacementValue:
    x: float
    value: float
    stderr: float
    method: str
    fallback: bool = False


@dataclass(frozen=True)
class D12Report(BaseReport):
    """Outcome of a D_{1,2} norm computation.

    ``displacement_integral`` is the upper bracket when it is finite and the
    raw shell integral otherwise; ``lower_bracket`` adds to the raw shells
    the lower envelope of G below the deepest shell, when one is known.
    A divergent integral is reported as ``inf`` with the verdict
    ``not-member-numerically``.
    """

    function: Dict[str, Any]
    process: Dict[str, Any]
    mode: str
    method: str
    l2_norm_sq: float
    l2_stderr: float
    displacement_integral: float
    lower_bracket: float
    upper_bracket: float
    d12_norm_sq: float
    error_estimate: float
    finite: bool
    verdict: str
    envelope: Optional[str] = None
    partials: Tuple[float, ...] = ()
    g_curve: List[Tuple[float, float, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.pop("g_curve")
        return data


class D12Engine:
    """Evaluates ``E f(X_1)^2``, the displacement expectation ``G`` and their sum.

    In density mode, compound Poisson processes use their exact law, and
    stable processes use the tabulated density: functions constant outside
    a window are integrated piecewise (Gauss-Legendre where f varies, exact
    CDF masses where both f(y) and f(y+x) are constant), periodic functions
    against the periodised density. Monte Carlo mode draws ``mc_samples``
    copies of ``X_1`` per shell.

    Attributes:
        nodes_per_shell: Gauss-Legendre nodes per dyadic shell of the
            outer integral.
        max_depth: Raw shells go down to ``|x| = 2^-max_depth``. A finite
            envelope integral below this depth makes the integral finite, an
            infinite lower envelope integral makes it divergent; otherwise
            the growth heuristic runs on the partials of the last three
            single-shell refinements.
        far_exponent: Raw shells go up to ``|x| = 2^far_exponent``.
        periodic_points: Midpoints per period for periodic functions.
        gauss_nodes: Nodes per piece of the inner integral.
    """

    nodes_per_shell: int = 64
    max_depth: int = 40
    far_exponent: int = 40
    mc_samples: int = 10**6
    mc_nodes_per_shell: int = 8
    mc_max_depth: int = 20
    mc_far_exponent: int = 10
    periodic_points: int = 2**12
    periodic_nodes_per_shell: int = 16
    gauss_nodes: int = 32
    max_subpieces: int = 256

    def __init__(
        self,
        f: FunctionSpec,
        process: Process,
        measure: Optional[LevyMeasureSpec] = None,
        mode: str = DENSITY,
        mc_samples: Optional[int] = None,
        seed: int = 0,
        n_workers: Optional[int] = None,
        nodes_per_shell: Optional[int] = None,
    ):
        self.f = f
        self.process = process
        self.measure = measure or process.levy_measure()
        self.mode = _check_mode(mode)
        self.mc_samples = mc_samples or self.mc_samples
        self.seed = int(seed)
        self.n_workers = n_workers

        self.exact_law = isinstance(process, CompoundPoissonProcess)
        self.periodic = f.period is not None
        if self.mode == DENSITY and not self.exact_law and isinstance(f, Custom):
            logger.warning("No density quadrature for custom functions, using Monte Carlo")
            self.mode = MONTE_CARLO

        if self.mode == MONTE_CARLO:
            self.nodes_per_shell = nodes_per_shell or self.mc_nodes_per_shell
            self.max_depth = self.mc_max_depth
            self.far_exponent = self.mc_far_exponent
        else:
            self.nodes_per_shell = nodes_per_shell or self.nodes_per_shell
            if self.periodic and not self.exact_law:
                self.nodes_per_shell = nodes_per_shell or self.periodic_nodes_per_shell

        self._periodic_nodes: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    @property
    def method(self) -> str:
        if self.mode == MONTE_CARLO:
            return "monte-carlo"
        if self.exact_law:
            return "exact-law"
        return "density-quadrature"

    def _sample(self, substream: int) -> np.ndarray:
        return self.process.sample(1.0, self.mc_samples, self.seed, substream).values

    def _periodic_grid(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Midpoints ``u`` of one period, weights ``p~(u) P / n`` and ``f(u)``."""
        if self._periodic_nodes is None:
            period = self.f.period
            n = self.periodic_points
            u = (np.arange(n) + 0.5) * period / n
            weights = self.process.periodized_pdf(u, period=period) * period / n
            self._periodic_nodes = (u, weights, self.f(u))
        return self._periodic_nodes

    def _pieces(self, lo: float, hi: float, points: Sequence[float]) -> np.ndarray:
        """Cuts of ``[lo, hi]`` at ``points``, refined to about one scale unit."""
        cuts = np.unique([lo, hi, *(p for p in points if lo < p < hi)])
        scale = self.process.scale(1.0)
        refined = [cuts[:1]]
        for left, right in zip(cuts[:-1], cuts[1:]):
            n = min(self.max_subpieces, max(1, math.ceil((right - left) / scale)))
            refined.append(np.linspace(left, right, n + 1)[1:])
        return np.concatenate(refined)

    def _window_l2(self) -> float:
        f = self.f
        lo, hi = f.window
        left, right = f.limits
        total = left**2 * float(self.process.cdf(lo)) + right**2 * float(self.process.sf(hi))
        if hi > lo:
            cuts = self._pieces(lo, hi, f.breakpoints)
            for a, b in zip(cuts[:-1], cuts[1:]):
                nodes, weights = gauss_legendre(a, b, self.gauss_nodes)
                total += float(np.sum(weights * f(nodes) ** 2 * self.process.pdf(nodes)))
        return total

    def l2_norm_sq(self) -> Tuple[float, float]:
        """``E f(X_1)^2`` and its standard error."""
        f = self.f
        if self.mode == MONTE_CARLO:
            values = f(self._sample(0)) ** 2
            return float(values.mean()), float(values.std() / math.sqrt(values.size))
        if self.exact_law:
            return self.process.expect(lambda y: f(y) ** 2), 0.0
        if self.periodic:
            _, weights, fu = self._periodic_grid()
            return float(np.sum(weights * fu**2)), 0.0
        return self._window_l2(), 0.0

    def _window_displacement(self, x: float) -> float:
        f = self.f
        lo, hi = f.window
        start, stop = lo - max(x, 0.0), hi + max(-x, 0.0)
        points = set(f.breakpoints) | {lo, hi}
        cuts = np.unique(
            [start, stop, *(q for p in points for q in (p, p - x) if start < q < stop)]
        )

        def outside(y: float) -> bool:
            return y <= lo or y >= hi

        total = 0.0
        gauss_cuts = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            middle = 0.5 * (a + b)
            if outside(middle) and outside(middle + x):
                jump = float(f(middle + x) - f(middle))
                if jump != 0:
                    total += jump**2 * self.process.mass(a, b)
            else:
                gauss_cuts.append(self._pieces(a, b, ()))

        if gauss_cuts:
            nodes, weights = [], []
            for piece in gauss_cuts:
                for a, b in zip(piece[:-1], piece[1:]):
                    y, w = gauss_legendre(a, b, self.gauss_nodes)
                    nodes.append(y)
                    weights.append(w)
            y, w = np.concatenate(nodes), np.concatenate(weights)
            total += float(np.sum(w * (f(y + x) - f(y)) ** 2 * self.process.pdf(y)))
        return total

    def displacement(
        self, x: Any, substream: int = 1
    ) -> Tuple[np.ndarray, np.ndarray]:
        """``G(x)`` and its standard error at every ``x``.

        Args:
            x: Shifts.
            substream: RNG substream of the Monte Carlo sample.

        Returns:
            Values and standard errors (zero outside Monte Carlo mode).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f = self.f
        if self.mode == MONTE_CARLO:
            sample = self._sample(substream)
            base = f(sample)
            values = np.empty(x.size)
            errors = np.empty(x.size)
            for i, shift in enumerate(x):
                squared = (f(sample + shift) - base) ** 2
                values[i] = squared.mean()
                errors[i] = squared.std() / math.sqrt(squared.size)
            return values, errors

        zeros = np.zeros(x.size)
        if self.exact_law:
            support, probs = self.process.law()
            base = f(support)
            values = np.array(
                [np.sum(probs * (f(support + shift) - base) ** 2) for shift in x]
            )
            return values, zeros
        if self.periodic:
            u, weights, fu = self._periodic_grid()
            values = np.array([np.sum(weights * (f(u + shift) - fu) ** 2) for shift in x])
            return values, zeros
        values = np.array([self._window_displacement(shift) for shift in x])
        return values, zeros

    def _shell(self, j: int, index: int) -> Tuple[float, float, np.ndarray]:
        nodes, weights = gauss_legendre(2.0**j, 2.0 ** (j + 1), self.nodes_per_shell)
        h_plus, h_minus = _one_sided_densities(self.measure, nodes)
        g, g_err = self.displacement(np.concatenate([nodes, -nodes]), 1 + index)
        n = nodes.size
        contribution = float(np.sum(weights * (g[:n] * h_plus + g[n:] * h_minus)))
        error = float(np.sum(weights * (g_err[:n] * h_plus + g_err[n:] * h_minus)))
        curve = np.column_stack([np.concatenate([nodes, -nodes]), g, g_err])
        return contribution, error, curve

    def _periodic_far_tail(self) -> float:
        """``int_{|x| > 1} G(x) nu(dx)`` for periodic f and a stable measure.

        With ``x = (k + u/P) P`` the shell sum collapses onto one period,
        weighted by Hurwitz zeta functions.
        """
        period = self.f.period
        first = round(1 / period)
        s = self.measure.beta + 1
        u, w = gauss_legendre(0.0, period, self.nodes_per_shell)
        g, _ = self.displacement(u)
        weight = (
            self.measure.b
            * period**-s
            * (special.zeta(s, first + u / period) + special.zeta(s, first + 1 - u / period))
        )
        return float(np.sum(w * g * weight))

    def _discrete(self, l2: float, l2_err: float) -> D12Report:
        measure = self.measure
        locations = measure.locations
        g, g_err = self.displacement(locations, 1)
        integral = float(np.sum(measure.intensities * g))
        error = float(np.sum(measure.intensities * g_err))
        curve = [(float(a), float(b), float(c)) for a, b, c in zip(locations, g, g_err)]
        return self._report(
            l2, l2_err, integral, integral, integral, error, True, None, (), curve
        )

    def _report(
        self,
        l2: float,
        l2_err: float,
        integral: float,
        lower: float,
        upper: float,
        error: float,
        finite: bool,
        envelope: Optional[str],
        partials: Tuple[float, ...],
        curve: List[Tuple[float, float, float]],
    ) -> D12Report:
        try:
            function = self.f.to_dict()
        except SpecValidationError:
            function = {"variant": self.f.variant}
        return D12Report(
            function=function,
            process=self.process.params.to_dict(),
            mode=self.mode,
            method=self.method,
            l2_norm_sq=l2,
            l2_stderr=l2_err,
            displacement_integral=integral,
            lower_bracket=lower,
            upper_bracket=upper,
            d12_norm_sq=l2 + integral,
            error_estimate=error,
            finite=finite,
            verdict=MEMBER if finite else NOT_MEMBER,
            envelope=envelope,
            partials=partials,
            g_curve=curve,
        )

    def run(self) -> D12Report:
        """Computes the full report."""
        l2, l2_err = self.l2_norm_sq()
        logger.info(f"E f(X_1)^2 = {l2:.6g} ({self.method})")
        if isinstance(self.measure, FiniteDiscrete):
            return self._discrete(l2, l2_err)

        stable_tail = self.periodic and isinstance(self.measure, SymmetricStable)
        far = 0 if stable_tail else self.far_exponent
        exponents = list(range(-self.max_depth, far))
        results = run_tasks(
            self._shell, [(j, i) for i, j in enumerate(exponents)], self.n_workers
        )
        contributions = np.array([r[0] for r in results])
        stat_error = float(sum(r[1] for r in results))
        curve = np.concatenate([r[2] for r in results])
        curve = curve[np.argsort(curve[:, 0], kind="mergesort")]

        # partials over 2^-d <= |x| <= 1 for the last refinements d = depth-3 .. depth
        near = contributions[: self.max_depth][::-1]
        depths = range(max(1, self.max_depth - DEEP_REFINEMENTS), self.max_depth + 1)
        partials = tuple(float(near[:d].sum()) for d in depths)
        raw = float(contributions.sum())

        if stable_tail:
            raw += self._periodic_far_tail()
            far_bound = 0.0
        else:
            far_bound = 4 * sup_norm_bound(self.f) ** 2 * self.measure.tail_beyond(2.0**far)

        cutoff = 2.0**-self.max_depth
        envelope = small_shift_envelope(self.f, self.process)
        tail = math.inf if envelope is None else envelope.integral(self.measure, cutoff)
        upper = raw + far_bound + tail
        floor = small_shift_floor(self.f, self.process)
        floor_tail = 0.0 if floor is None else floor.integral(self.measure, cutoff)
        lower = raw + floor_tail

        if not math.isfinite(raw) or math.isinf(floor_tail):
            finite = False
        elif math.isfinite(tail):
            finite = True
        else:
            finite = not growth_diverges(partials)

        if not finite:
            logger.warning(
                f"Displacement integral declared divergent, partials {[f'{p:.4g}' for p in partials]}"
            )
            integral, upper = math.inf, math.inf
        else:
            integral = upper if math.isfinite(upper) else raw
        error = (upper - raw if math.isfinite(upper) else math.nan) + stat_error
        logger.info(f"Displacement integral in [{lower:.6g}, {upper:.6g}]")

        return self._report(
            l2,
            l2_err,
            integral,
            lower,
            upper,
            error,
            finite,
            envelope.source if envelope else None,
            partials,
            [tuple(row) for row in curve.tolist()],
        )


def l2_norm_sq(
    f: FunctionSpec,
    process: Process,
    mode: str = DENSITY,
    samples: Optional[int] = None,
    seed: int = 0,
) -> Tuple[float, float]:
    """``E f(X_1)^2`` with its standard error."""
    return D12Engine(f, process, mode=mode, mc_samples=samples, seed=seed).l2_norm_sq()


def displacement_expectation(
    f: FunctionSpec,
    process: Process,
    x: float,
    mode: str = DENSITY,
    samples: Optional[int] = None,
    seed: int = 0,
    substream: int = 1,
) -> DisplacementValue:
    """``G(x) = E (f(X_1 + x) - f(X_1))^2``.

    Non-finite quadrature results fall back to Monte Carlo, flagged in the
    returned value.
    """
    x = float(x)
    engine = D12Engine(f, process, mode=mode, mc_samples=samples, seed=seed)
    if x == 0:
        return DisplacementValue(x, 0.0, 0.0, engine.method)
    values, errors = engine.displacement(x, substream)
    if not math.isfinite(values[0]):
        logger.warning(f"Quadrature failed for G({x}), falling back to Monte Carlo")
        engine = D12Engine(f, process, mode=MONTE_CARLO, mc_samples=samples, seed=seed)
        values, errors = engine.displacement(x, substream)
        return DisplacementValue(x, float(values[0]), float(errors[0]), engine.method, True)
    return DisplacementValue(x, float(values[0]), float(errors[0]), engine.method)


def d12_norm_sq(
    f: FunctionSpec,
    process: Process,
    measure: Optional[LevyMeasureSpec] = None,
    mode: str = DENSITY,
    samples: Optional[int] = None,
    seed: int = 0,
    n_workers: Optional[int] = None,
) -> D12Report:
    """``||f(X_1)||^2_{D_{1,2}} = E f(X_1)^2 + int G(x) nu(dx)``.

    Args:
        f: The function.
        process: The process, stable or compound Poisson.
        measure: Lévy measure of the process; derived from it when omitted.
        mode: ``density`` or ``mc``.
        samples: Monte Carlo sample size per shell.
        seed: Master seed.
        n_workers: Worker processes for the shells.

    Returns:
        The report.
    """
    engine = D12Engine(
        f, process, measure, mode=mode, mc_samples=samples, seed=seed, n_workers=n_workers
    )
    return engine.run()


def holder_upper_bound(
    f: FunctionSpec, measure: LevyMeasureSpec, alpha: Optional[float] = None
) -> float:
    """``(1 + 4 m_{2 alpha}) ||f||^2_{C^alpha_b}``, ``inf`` when the moment diverges."""
    certificate = holder_certificate(f, alpha)
    m = moment(measure, 2 * certificate.alpha)
    if not m.finite:
        return math.inf
    return (1 + 4 * m.value) * certificate.norm**2


def bv_upper_bound(f: FunctionSpec, measure: LevyMeasureSpec, p_sup: float) -> float:
    """``(1 + (1 v sup p_1) m_1) ||f||^2_BV`` for normalised BV functions."""
    bv = _bv_norm(f)
    if bv is None or isinstance(f, SmoothedIndicator):
        raise SpecValidationError("function", f"expected an NBV function, got {f.variant}")
    m = moment(measure, 1.0)
    if not m.finite:
        return math.inf
    return (1 + max(1.0, p_sup) * m.value) * bv**2


def indicator_lower_bound(
    K: float, r: float, c_density: float, measure: LevyMeasureSpec
) -> float:
    """``c int_{0 < |x| <= r} |x| nu(dx)``.

    Bounds the displacement integral of ``1_{[K, inf)}`` from below when the
    density of ``X_1`` is at least ``c_density`` on ``[K - r, K + r]``.
    """
    if c_density == 0:
        return 0.0
    return c_density * truncated_abs_moment(measure, 1.0, r)


def _full_abs_moment(measure: LevyMeasureSpec, p: float) -> float:
    """``int |x|^p nu(dx)`` over the whole line."""
    if isinstance(measure, FiniteDiscrete):
        return float(np.sum(measure.intensities * np.abs(measure.locations) ** p))
    small = truncated_abs_moment(measure, p, 1.0)
    if not math.isfinite(small):
        return math.inf
    if isinstance(measure, SymmetricStable):
        if p >= measure.beta:
            return math.inf
        return small + 2 * measure.b / (measure.beta - p)
    # x = e^v
    big, _ = integrate.quad(
        lambda v: float(measure.two_sided_density(math.exp(v))) * math.exp((p + 1) * v),
        0.0,
        np.inf,
        limit=200,
    )
    return small + big


def holder_first_order_bound(
    f: FunctionSpec, process: Process, alpha: Optional[float] = None, **kwargs: Any
) -> float:
    """``E f(X_1)^2 + [f]^2_alpha int |x|^{2 alpha} nu(dx)``, finite iff the moment is."""
    certificate = holder_certificate(f, alpha)
    l2, _ = l2_norm_sq(f, process, **kwargs)
    moment_value = _full_abs_moment(process.levy_measure(), 2 * certificate.alpha)
    if certificate.seminorm == 0:
        return l2
    return l2 + certificate.seminorm**2 * moment_value


def _require_cpp(process: Process) -> CompoundPoissonProcess:
    if not isinstance(process, CompoundPoissonProcess):
        raise SpecValidationError(
            "process", "big-jump functionals are only available for compound Poisson processes"
        )
    return process


@dataclass(frozen=True)
class MonteCarloValue:
    value: float
    stderr: float
    exact: Optional[float] = None


def _mc(values: np.ndarray, exact: Optional[float] = None) -> MonteCarloValue:
    return MonteCarloValue(
        float(values.mean()), float(values.std() / math.sqrt(values.size)), exact
    )


def _mecke_sum(
    f: FunctionSpec, process: CompoundPoissonProcess, atoms: Sequence[Tuple[float, float]]
) -> float:
    """``E[f^2(X_1) N(B)] = sum_{x_i in B} lambda_i E f^2(X_1 + x_i)``."""
    return sum(
        intensity * process.expect(lambda y, shift=location: f(y + shift) ** 2)
        for location, intensity in atoms
    )


def big_jump_term(
    f: FunctionSpec, process: Process, samples: int = 10**6, seed: int = 0
) -> MonteCarloValue:
    """``E[f^2(X_1) N(A)]`` with ``A`` the jumps of size ``|x| > 1`` before time 1.

    Estimated from the joint simulation of ``X_1`` and its big-jump count;
    the exact value from the Mecke formula is attached.
    """
    process = _require_cpp(process)
    batch = process.sample(1.0, samples, seed, 0)
    big = [a for a in process.params.atoms if abs(a[0]) > 1]
    return _mc(f(batch.values) ** 2 * batch.big_jump_counts, _mecke_sum(f, process, big))


def holder_big_jump_bound(
    f: FunctionSpec, process: Process, alpha: Optional[float] = None
) -> float:
    """``[f]^2 m_{2 alpha} + E[f^2(X_1) N(A)] + E f^2(X_1) (1 + nu(|x| > 1))``."""
    process = _require_cpp(process)
    certificate = holder_certificate(f, alpha)
    measure = process.levy_measure()
    big = [a for a in process.params.atoms if abs(a[0]) > 1]
    l2 = process.expect(lambda y: f(y) ** 2)
    m = moment(measure, 2 * certificate.alpha).value
    return (
        certificate.seminorm**2 * m
        + _mecke_sum(f, process, big)
        + l2 * (1 + measure.tail_beyond(1.0))
    )


@dataclass(frozen=True)
class CPPMembership(BaseReport):
    """Both sides of a compound Poisson membership criterion."""

    lhs: MonteCarloValue
    rhs: MonteCarloValue
    verdict: str
    theta: Optional[float] = None


def cpp_membership_check(
    f: FunctionSpec,
    atoms: Sequence[Tuple[float, float]],
    samples: int = 10**6,
    seed: int = 0,
) -> CPPMembership:
    """``E[f^2(X_1)(N + 1)]`` against the D_{1,2} norm for a compound Poisson process.

    Both sides come from one joint sample of ``(X_1, N)``; the exact values
    (Mecke formula and exact law) are attached.
    """
    params = CompoundPoissonParams(atoms=tuple(tuple(a) for a in atoms))
    process = CompoundPoissonProcess(params)
    batch = sample_cpp(params.atoms, 1.0, samples, seed, 0)
    squared = f(batch.values) ** 2
    l2_exact = process.expect(lambda y: f(y) ** 2)

    lhs = _mc(squared * (batch.jump_counts + 1), l2_exact + _mecke_sum(f, process, params.atoms))

    rhs_values = squared.copy()
    for location, intensity in params.atoms:
        rhs_values = rhs_values + intensity * (f(batch.values + location) - f(batch.values)) ** 2
    rhs_exact = d12_norm_sq(f, process).d12_norm_sq
    rhs = _mc(rhs_values, rhs_exact)

    finite = math.isfinite(lhs.value) and math.isfinite(rhs.value)
    return CPPMembership(lhs, rhs, MEMBER if finite else NOT_MEMBER)


def _count_conditional_laws(
    process: CompoundPoissonProcess,
) -> Iterator[Tuple[int, float, np.ndarray, np.ndarray]]:
    """Yields ``n``, ``P(N = n)`` and the law of ``X_1`` given ``N = n``."""
    atoms = np.asarray(process.params.atoms, dtype=float).reshape(-1, 2)
    locations, intensities = atoms[:, 0], atoms[:, 1]
    total = float(intensities.sum())
    support, probs = np.zeros(1), np.ones(1)
    if total == 0:
        yield 0, 1.0, support, probs
        return

    n_max = int(stats.poisson.isf(process.truncation, total)) + 1
    pmf = stats.poisson.pmf(np.arange(n_max + 1), total)
    jumps = intensities / total
    for n in range(n_max + 1):
        yield n, float(pmf[n]), support, probs
        points = np.add.outer(support, locations).ravel()
        weights = np.multiply.outer(probs, jumps).ravel()
        support, inverse = np.unique(np.round(points, 12), return_inverse=True)
        probs = np.zeros(support.size)
        np.add.at(probs, inverse, weights)
        if support.size > process.max_support:
            raise LevySmoothError(
                f"Conditional law exceeds {process.max_support} support points"
            )


def count_weighted_moment(f: FunctionSpec, process: CompoundPoissonProcess, p: float) -> float:
    """``E[f^2(X_1) N^p]`` from the law of ``X_1`` conditioned on the jump count."""
    return sum(
        weight * n**p * float(np.sum(probs * f(support) ** 2))
        for n, weight, support, probs in _count_conditional_laws(process)
        if n > 0
    )


def cpp_fractional_check(
    f: FunctionSpec, atoms: Sequence[Tuple[float, float]], theta: float
) -> CPPMembership:
    """``E[f^2(X_1)(N^theta + 1)]``, finite iff ``f(X_1)`` lies in the ``(theta, 2)`` interpolation space.

    Computed exactly by conditioning on the jump count. The right-hand side
    is ``E[f^2(X_1)(N + 1)]``, the D_{1,2} criterion, which dominates the
    left one.
    """
    theta = float(theta)
    if not 0 < theta < 1:
        raise SpecValidationError("theta", f"expected a value in (0, 1), got {theta}")
    params = CompoundPoissonParams(atoms=tuple(tuple(a) for a in atoms))
    process = CompoundPoissonProcess(params)
    l2 = process.expect(lambda y: f(y) ** 2)
    lhs = l2 + count_weighted_moment(f, process, theta)
    rhs = l2 + count_weighted_moment(f, process, 1.0)
    finite = math.isfinite(lhs)
    return CPPMembership(
        MonteCarloValue(lhs, 0.0, lhs),
        MonteCarloValue(rhs, 0.0, rhs),
        MEMBER if finite else NOT_MEMBER,
        theta,
    )


@dataclass(frozen=True)
class EnvelopeRow:
    x: float
    g: float
    bound: float
    holds: bool


def powercap_envelope_check(
    alpha: float, process: StableProcess, x_grid: Sequence[float]
) -> List[EnvelopeRow]:
    """``G(x)`` of ``|x|^alpha ^ 1`` against its regime envelope on ``0 < |x| <= 1``."""
    f = PowerCap(alpha)
    engine = D12Engine(f, process)
    x = np.asarray(x_grid, dtype=float)
    values, _ = engine.displacement(x)
    rows = []
    for shift, g in zip(x, values):
        bound = powercap_regime_bound(alpha, shift, process.p_sup)
        rows.append(EnvelopeRow(float(shift), float(g), bound, bool(g <= bound)))
    return rows
