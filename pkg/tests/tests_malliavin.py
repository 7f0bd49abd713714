from __future__ import annotations

import math
import unittest

import numpy as np

from levysmooth.base import SpecValidationError
from levysmooth.function_space import (
    Ciesielski,
    Constant,
    Custom,
    Indicator,
    PowerCap,
    holder_certificate,
)
from levysmooth.levy_model import nu_to_char_scale
from levysmooth.malliavin import *
from levysmooth.stable_process import (
    CompoundPoissonParams,
    CompoundPoissonProcess,
    StableParams,
    StableProcess,
)

CAUCHY = StableProcess(StableParams(beta=1.0, c=1.0))
HALF_STABLE = StableProcess(StableParams(beta=0.5, c=nu_to_char_scale(1.0, 0.5)))
POISSON = CompoundPoissonProcess(CompoundPoissonParams(atoms=((1.0, 1.0),)))
POISSON_TWO = CompoundPoissonProcess(CompoundPoissonParams(atoms=((2.0, 1.0),)))


class TestDisplacement(unittest.TestCase):
    def test_indicator_cauchy(self) -> None:
        value = displacement_expectation(Indicator(0.0), CAUCHY, 1.0)
        self.assertAlmostEqual(value.value, 0.25, places=4)
        self.assertEqual(value.method, "density-quadrature")
        self.assertFalse(value.fallback)

        mirrored = displacement_expectation(Indicator(0.0), CAUCHY, -1.0)
        self.assertAlmostEqual(mirrored.value, 0.25, places=4)

    def test_zero_shift(self) -> None:
        self.assertEqual(displacement_expectation(PowerCap(0.3), CAUCHY, 0.0).value, 0.0)

    def test_monte_carlo(self) -> None:
        value = displacement_expectation(
            Indicator(0.0), CAUCHY, 1.0, mode="mc", samples=10**5, seed=3
        )
        self.assertEqual(value.method, "monte-carlo")
        self.assertLess(abs(value.value - 0.25), 5 * value.stderr)

    def test_exact_law(self) -> None:
        value = displacement_expectation(Indicator(1.0), POISSON, 1.0)
        self.assertAlmostEqual(value.value, math.exp(-1), places=10)

    def test_custom_falls_back_to_monte_carlo(self) -> None:
        f = Custom(lambda y: float(y >= 0))
        with self.assertLogs("levysmooth.malliavin", level="WARNING"):
            engine = D12Engine(f, CAUCHY, mc_samples=1000)
        self.assertEqual(engine.mode, MONTE_CARLO)

    def test_invalid_mode(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            displacement_expectation(Indicator(0.0), CAUCHY, 1.0, mode="exact")
        self.assertEqual(cm.exception.path, "mode")


class TestL2(unittest.TestCase):
    def test_window(self) -> None:
        value, error = l2_norm_sq(Indicator(0.0), CAUCHY)
        self.assertAlmostEqual(value, 0.5, places=6)
        self.assertEqual(error, 0.0)

    def test_periodic(self) -> None:
        f = Ciesielski(0.5)
        value, _ = l2_norm_sq(f, CAUCHY)
        self.assertGreater(value, 0.0)
        self.assertLessEqual(value, f.sup_bound**2)

    def test_exact_law(self) -> None:
        value, _ = l2_norm_sq(Indicator(1.0), POISSON)
        self.assertAlmostEqual(value, 1 - math.exp(-1), places=10)


class TestD12(unittest.TestCase):
    def test_compound_poisson_identity(self) -> None:
        report = d12_norm_sq(Indicator(1.0), POISSON)
        self.assertAlmostEqual(report.d12_norm_sq, 1.0, places=8)
        self.assertEqual(report.verdict, MEMBER)
        self.assertEqual(report.method, "exact-law")

    def test_compound_poisson_monte_carlo(self) -> None:
        report = d12_norm_sq(Indicator(1.0), POISSON, mode="mc", samples=10**6, seed=7)
        sigma = report.l2_stderr + report.error_estimate
        self.assertLess(abs(report.d12_norm_sq - 1.0), 3 * sigma)

    def test_constant(self) -> None:
        report = d12_norm_sq(Constant(2.0), CAUCHY, n_workers=1)
        self.assertEqual(report.lower_bracket, 0.0)
        self.assertAlmostEqual(report.d12_norm_sq, 4.0, places=6)

    def test_indicator_diverges_for_large_index(self) -> None:
        process = StableProcess(StableParams(beta=1.5, c=1.0))
        report = d12_norm_sq(Indicator(0.0), process, n_workers=1)
        self.assertTrue(math.isinf(report.d12_norm_sq))
        self.assertFalse(report.finite)
        self.assertEqual(report.verdict, NOT_MEMBER)

    def test_indicator_finite_below_index_one(self) -> None:
        for beta in (0.9, 0.95):
            with self.subTest(beta=beta):
                process = StableProcess(StableParams(beta=beta, c=1.0))
                report = d12_norm_sq(Indicator(0.0), process, n_workers=1)
                self.assertTrue(report.finite)
                self.assertEqual(report.verdict, MEMBER)
                self.assertTrue(math.isfinite(report.d12_norm_sq))
                self.assertEqual(len(report.partials), 4)
                self.assertLessEqual(report.lower_bracket, report.upper_bracket)
                self.assertLessEqual(
                    report.d12_norm_sq,
                    bv_upper_bound(Indicator(0.0), process.levy_measure(), process.p_sup),
                )

    def test_indicator_diverges_at_index_one(self) -> None:
        report = d12_norm_sq(Indicator(0.0), CAUCHY, n_workers=1)
        self.assertFalse(report.finite)
        self.assertTrue(math.isinf(report.lower_bracket))
        self.assertEqual(report.verdict, NOT_MEMBER)

    def test_holder_bound(self) -> None:
        f = Ciesielski(0.5)
        bound = holder_upper_bound(f, HALF_STABLE.levy_measure())
        self.assertAlmostEqual(bound, 33 * holder_certificate(f).norm ** 2, places=8)

        report = d12_norm_sq(f, HALF_STABLE, n_workers=1)
        self.assertTrue(report.finite)
        self.assertEqual(report.envelope, "holder")
        self.assertLessEqual(report.lower_bracket, report.upper_bracket)
        self.assertLessEqual(report.d12_norm_sq, bound)

    def test_bv_bound_and_indicator_lower_bound(self) -> None:
        f = Indicator(0.0)
        measure = HALF_STABLE.levy_measure()
        report = d12_norm_sq(f, HALF_STABLE, n_workers=1)
        self.assertTrue(report.finite)
        self.assertEqual(report.envelope, "bounded-variation")
        self.assertLessEqual(
            report.d12_norm_sq, bv_upper_bound(f, measure, HALF_STABLE.p_sup)
        )

        c_density = float(HALF_STABLE.pdf(1.0))
        lower = indicator_lower_bound(0.0, 1.0, c_density, measure)
        self.assertAlmostEqual(lower, 4 * c_density, places=10)
        self.assertGreaterEqual(report.displacement_integral, lower)

    def test_g_curve(self) -> None:
        report = d12_norm_sq(Indicator(0.0), HALF_STABLE, n_workers=1)
        x = np.array([row[0] for row in report.g_curve])
        self.assertTrue(np.all(np.diff(x) >= 0))
        self.assertNotIn("g_curve", report.to_dict())


class TestBounds(unittest.TestCase):
    def test_divergent_moment(self) -> None:
        self.assertTrue(math.isinf(holder_upper_bound(PowerCap(0.25), HALF_STABLE.levy_measure())))

    def test_bv_bound_rejects_holder_functions(self) -> None:
        with self.assertRaises(SpecValidationError):
            bv_upper_bound(Ciesielski(0.5), HALF_STABLE.levy_measure(), 1.0)

    def test_first_order_bound(self) -> None:
        bound = holder_first_order_bound(PowerCap(0.5), POISSON)
        self.assertAlmostEqual(bound, 2 - math.exp(-1), places=8)

    def test_big_jump_bound(self) -> None:
        bound = holder_big_jump_bound(PowerCap(0.5), POISSON_TWO)
        self.assertAlmostEqual(bound, 4 - 2 * math.exp(-1), places=8)

    def test_big_jump_requires_compound_poisson(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            big_jump_term(PowerCap(0.5), CAUCHY)
        self.assertEqual(cm.exception.path, "process")


class TestCompoundPoisson(unittest.TestCase):
    def test_membership(self) -> None:
        check = cpp_membership_check(Indicator(1.0), [(1.0, 1.0)], samples=10**5, seed=1)
        self.assertAlmostEqual(check.lhs.exact, 2 - math.exp(-1), places=8)
        self.assertAlmostEqual(check.rhs.exact, 1.0, places=8)
        self.assertLess(abs(check.lhs.value - check.lhs.exact), 5 * check.lhs.stderr)
        self.assertLess(abs(check.rhs.value - check.rhs.exact), 5 * check.rhs.stderr)
        self.assertEqual(check.verdict, MEMBER)

    def test_big_jump_term(self) -> None:
        term = big_jump_term(Custom(lambda y: y), POISSON_TWO, samples=10**5, seed=2)
        self.assertAlmostEqual(term.exact, 20.0, places=6)
        self.assertLess(abs(term.value - 20.0), 5 * term.stderr)

    def test_fractional(self) -> None:
        check = cpp_fractional_check(Indicator(1.0), [(1.0, 1.0)], 0.5)
        expected = sum(
            math.exp(-1) / math.factorial(n) * (math.sqrt(n) + 1) for n in range(1, 40)
        )
        self.assertAlmostEqual(check.lhs.value, expected, places=10)
        self.assertAlmostEqual(check.rhs.value, 2 - math.exp(-1), places=10)
        self.assertLess(check.lhs.value, check.rhs.value)
        self.assertEqual(check.verdict, MEMBER)
        self.assertEqual(check.theta, 0.5)
        with self.assertRaises(SpecValidationError):
            cpp_fractional_check(Indicator(1.0), [(1.0, 1.0)], 1.0)

    def test_fractional_two_atoms(self) -> None:
        # X_1 = N_1 - N_2 with independent unit Poisson counts
        check = cpp_fractional_check(Custom(lambda y: y), [(1.0, 1.0), (-1.0, 1.0)], 0.5)
        self.assertAlmostEqual(check.rhs.value, 2.0 + 6.0, places=8)
        self.assertLess(check.lhs.value, check.rhs.value)
        self.assertGreater(check.lhs.value, 2.0)


class TestPowerCapEnvelope(unittest.TestCase):
    def test_envelope_holds(self) -> None:
        rows = powercap_envelope_check(0.25, CAUCHY, [2.0**-k for k in range(1, 7)])
        self.assertEqual(len(rows), 6)
        for row in rows:
            self.assertTrue(row.holds, row)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
