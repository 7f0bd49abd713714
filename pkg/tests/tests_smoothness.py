from __future__ import annotations

import math
import unittest

import numpy as np

from levysmooth.base import InsufficientDataError, SpecValidationError
from levysmooth.function_space import Ciesielski, Constant, Indicator, NBVMixture
from levysmooth.levy_model import nu_to_char_scale
from levysmooth.smoothness import *
from levysmooth.stable_process import (
    CompoundPoissonParams,
    CompoundPoissonProcess,
    StableParams,
    StableProcess,
)

CAUCHY = StableProcess(StableParams(beta=1.0, c=1.0))
STABLE_15 = StableProcess(StableParams(beta=1.5, c=1.0))
HALF_STABLE = StableProcess(StableParams(beta=0.5, c=nu_to_char_scale(1.0, 0.5)))
POISSON = CompoundPoissonProcess(CompoundPoissonParams(atoms=((1.0, 1.0),)))
STEP = NBVMixture(atoms=((0.0, 1.0),))


def synthetic_curve(values, t_grid, relative_error=0.01) -> PsiCurve:
    values = [float(v) for v in values]
    return PsiCurve(
        t_grid=[float(t) for t in t_grid],
        psi=values,
        stderr=[relative_error * v for v in values],
        n_samples=1000,
        seed=0,
    )


class TestPsi(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            psi(Indicator(0.0), CAUCHY, 1.0)
        self.assertEqual(cm.exception.path, "t")
        with self.assertRaises(SpecValidationError) as cm:
            psi(Indicator(0.0), CAUCHY, 0.5, n=10)
        self.assertEqual(cm.exception.path, "n")

    def test_variance_at_zero(self) -> None:
        value = psi(Indicator(0.0), CAUCHY, 0.0, n=10**5, seed=11)
        self.assertLess(abs(value.psi - 0.25), 4 * value.stderr)
        self.assertAlmostEqual(indicator_psi_exact(CAUCHY, 0.0, 0.0), 0.25, places=6)

    def test_against_exact_indicator(self) -> None:
        exact = indicator_psi_exact(CAUCHY, 0.0, 0.5)
        self.assertGreater(exact, 0.0)
        self.assertLess(exact, 0.25)
        value = psi(Indicator(0.0), CAUCHY, 0.5, n=10**5, seed=5)
        self.assertLess(abs(value.psi - exact), 5 * value.stderr)

    def test_compound_poisson(self) -> None:
        exact = indicator_psi_exact(POISSON, 1.0, 0.5)
        value = psi(Indicator(1.0), POISSON, 0.5, n=10**5, seed=2)
        self.assertLess(abs(value.psi - exact), 5 * value.stderr)

    def test_exact_indicator_decreases(self) -> None:
        values = [indicator_psi_exact(STABLE_15, 0.0, t) for t in (0.0, 0.5, 0.75, 0.875)]
        self.assertTrue(all(a > b for a, b in zip(values[:-1], values[1:])))


class TestPsiCurve(unittest.TestCase):
    def test_constant(self) -> None:
        curve = psi_curve(Constant(1.0), CAUCHY, n=1000, n_workers=1)
        self.assertEqual(len(curve.t_grid), 10)
        self.assertEqual(curve.psi, [0.0] * 10)
        with self.assertRaises(InsufficientDataError):
            fit_exponent(curve)

    def test_grid_validation(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            psi_curve(Indicator(0.0), CAUCHY, t_grid=[0.5, 1.0], n=1000)
        self.assertEqual(cm.exception.path, "t_grid")
        with self.assertRaises(SpecValidationError):
            psi_curve(Indicator(0.0), CAUCHY, t_grid=[0.5, 0.25], n=1000)

    def test_monotone(self) -> None:
        curve = psi_curve(
            Indicator(0.0), CAUCHY, t_grid=default_t_grid(5), n=20000, seed=3, n_workers=1
        )
        for k in range(len(curve.psi) - 1):
            slack = 3 * (curve.stderr[k] + curve.stderr[k + 1])
            self.assertLessEqual(curve.psi[k + 1], curve.psi[k] + slack)
        self.assertEqual(len(curve.rows()), 5)

    def test_reproducible(self) -> None:
        grid = default_t_grid(3)
        first = psi_curve(Indicator(0.0), CAUCHY, t_grid=grid, n=1000, seed=9, n_workers=1)
        second = psi_curve(Indicator(0.0), CAUCHY, t_grid=grid, n=1000, seed=9, n_workers=1)
        self.assertEqual(first, second)


class TestFit(unittest.TestCase):
    def test_power_law(self) -> None:
        grid = default_t_grid(8)
        curve = synthetic_curve(2 * (1 - grid) ** 0.7, grid)
        fit = fit_exponent(curve)
        self.assertAlmostEqual(fit.slope, 0.7, places=8)
        self.assertAlmostEqual(fit.intercept, math.log(2), places=8)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=8)
        self.assertEqual(fit.n_points, 8)
        self.assertAlmostEqual(fit.theta_max, 0.7, places=8)

    def test_log_correction(self) -> None:
        grid = default_t_grid(8)
        curve = synthetic_curve((1 - grid) * np.log(2 / (1 - grid)), grid)
        self.assertLess(fit_exponent(curve).slope, 1.0)
        fit = fit_exponent(curve, log_correction=True)
        self.assertAlmostEqual(fit.slope, 1.0, places=8)
        self.assertLess(fit.theta_max, 1.0)

    def test_noisy_points_are_dropped(self) -> None:
        grid = default_t_grid(6)
        curve = synthetic_curve((1 - grid) ** 0.5, grid)
        noisy = PsiCurve(
            curve.t_grid, curve.psi, curve.stderr[:3] + [1.0, 1.0, 1.0], 1000, 0
        )
        with self.assertRaises(InsufficientDataError):
            fit_exponent(noisy)


class TestMembership(unittest.TestCase):
    def setUp(self) -> None:
        grid = default_t_grid(8)
        self.curve = synthetic_curve((1 - grid) ** 0.7, grid)

    def test_bounded(self) -> None:
        stat = membership_statistic(self.curve, 0.5)
        self.assertEqual(stat.verdict, "bounded-on-grid")
        self.assertEqual(stat.rule, GROWTH_RULE)

    def test_growing(self) -> None:
        with self.assertLogs("levysmooth.smoothness", level="WARNING"):
            stat = membership_statistic(self.curve, 0.9)
        self.assertEqual(stat.verdict, "growing")

    def test_zero_curve(self) -> None:
        grid = default_t_grid(4)
        curve = PsiCurve(list(grid), [0.0] * 4, [0.0] * 4, 1000, 0)
        stat = membership_statistic(curve, 0.5)
        self.assertEqual(stat.sup_stat, 0.0)
        self.assertEqual(stat.verdict, "bounded-on-grid")

    def test_theta_range(self) -> None:
        with self.assertRaises(SpecValidationError):
            membership_statistic(self.curve, 1.0)


class TestSmallTime(unittest.TestCase):
    def test_cauchy_probes(self) -> None:
        converging = small_time_exceedance(CAUCHY, 2.0)
        self.assertTrue(converging.finite)
        diverging = small_time_exceedance(CAUCHY, 0.5)
        self.assertFalse(diverging.finite)
        self.assertTrue(math.isinf(diverging.integral))
        self.assertGreater(diverging.partials[-1], 10 * converging.integral)

    def test_vanishing_domain(self) -> None:
        report = small_time_exceedance(CAUCHY, 2.0, t0=2.0**-20)
        self.assertLess(report.integral, 0.01)

    def test_symmetry_required(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            small_time_exceedance(POISSON, 2.0)
        self.assertEqual(cm.exception.path, "process")
        symmetric = CompoundPoissonProcess(
            CompoundPoissonParams(atoms=((1.0, 0.5), (-1.0, 0.5)))
        )
        self.assertTrue(small_time_exceedance(symmetric, 2.0).finite)


class TestBounds(unittest.TestCase):
    def test_holder_psi_bound(self) -> None:
        f = Ciesielski(0.25)
        bound = stable_holder_psi_bound(f, CAUCHY, 0.5)
        value = psi(f, CAUCHY, 0.5, n=10**4, seed=1)
        self.assertLessEqual(value.psi, bound + 3 * value.stderr)
        self.assertTrue(math.isinf(stable_holder_psi_bound(Ciesielski(0.75), CAUCHY, 0.5)))

    def test_bv_psi_bound(self) -> None:
        bound = stable_bv_psi_bound(STEP, STABLE_15, 0.5)
        self.assertGreaterEqual(bound, indicator_psi_exact(STABLE_15, 0.0, 0.5))
        with self.assertRaises(SpecValidationError) as cm:
            stable_bv_psi_bound(STEP, CAUCHY, 0.5)
        self.assertEqual(cm.exception.path, "process.beta")

    def test_interp_constant(self) -> None:
        measure = HALF_STABLE.levy_measure()
        self.assertAlmostEqual(holder_interp_constant(0.25, 0.5, measure), 18 * math.sqrt(33))
        self.assertTrue(math.isinf(holder_interp_constant(0.25, 0.5, CAUCHY.levy_measure())))


class TestBVInterpolation(unittest.TestCase):
    def test_constant_holds(self) -> None:
        report = bv_interp_upper(STEP, 0.5, HALF_STABLE, t_grid=[0.5, 0.125], n_workers=1)
        self.assertEqual(len(report.rows), 2)
        self.assertTrue(report.holds)
        self.assertLessEqual(report.sup, report.constant)

        doubled = NBVMixture(atoms=((0.0, 2.0),))
        scaled = bv_interp_upper(doubled, 0.5, HALF_STABLE, t_grid=[0.5, 0.125], n_workers=1)
        self.assertAlmostEqual(scaled.sup, 2 * report.sup, places=6)
        self.assertAlmostEqual(scaled.constant, 2 * report.constant, places=10)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
