from __future__ import annotations

import math
import unittest

from levysmooth.base import SpecValidationError
from levysmooth.levy_model import *


class TestMeasureSpecs(unittest.TestCase):
    def test_invalid_parameters(self) -> None:
        with self.assertRaises(SpecValidationError):
            SymmetricStable(b=-1, beta=1)
        with self.assertRaises(SpecValidationError):
            SymmetricStable(b=1, beta=2)
        with self.assertRaises(SpecValidationError):
            FiniteDiscrete(atoms=((0, 1),))
        with self.assertRaises(SpecValidationError):
            FiniteDiscrete(atoms=((1, -1),))

        LogDampedStable(b=1, beta=2)

    def test_generic_density_not_integrable(self) -> None:
        with self.assertRaises(SpecValidationError):
            GenericDensity(h=lambda x: abs(x) ** -3.5)

    def test_from_dict(self) -> None:
        measure = measure_from_dict({"variant": "symmetric_stable", "b": 1, "beta": 0.5})
        self.assertEqual(measure, SymmetricStable(1, 0.5))
        self.assertEqual(measure_from_dict(measure.to_dict()), measure)

        measure = measure_from_dict({"variant": "finite_discrete", "atoms": [[1, 2]]})
        self.assertEqual(measure.atoms, ((1.0, 2.0),))

    def test_from_dict_errors(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            measure_from_dict({"variant": "gaussian"})
        self.assertEqual(cm.exception.path, "measure.variant")

        with self.assertRaises(SpecValidationError) as cm:
            measure_from_dict({"variant": "symmetric_stable", "b": 1, "beta": 3})
        self.assertEqual(cm.exception.path, "measure.beta")

        with self.assertRaises(SpecValidationError) as cm:
            measure_from_dict({"variant": "log_damped_stable", "beta": 1})
        self.assertEqual(cm.exception.path, "measure.b")


class TestMoment(unittest.TestCase):
    def test_stable_closed_form(self) -> None:
        value = moment(SymmetricStable(b=1, beta=0.5), 1)
        self.assertTrue(value.finite)
        self.assertAlmostEqual(value.value, 8.0, places=12)
        self.assertEqual(value.method, "closed_form")

    def test_stable_divergent(self) -> None:
        value = moment(SymmetricStable(b=1, beta=0.5), 0.5)
        self.assertFalse(value.finite)
        self.assertEqual(value.value, math.inf)

    def test_finite_discrete(self) -> None:
        value = moment(FiniteDiscrete(atoms=((1, 2),)), 7)
        self.assertEqual(value.value, 2.0)

        value = moment(FiniteDiscrete(atoms=((0.5, 4), (2, 1))), 1)
        self.assertAlmostEqual(value.value, 3.0)

    def test_negative_xi(self) -> None:
        with self.assertRaises(SpecValidationError):
            moment(SymmetricStable(b=1, beta=0.5), -1)

    def test_quadrature_matches_closed_form(self) -> None:
        for b in (0.5, 2.0):
            for beta in (0.3, 1.0, 1.6):
                for xi in (beta + 0.1, beta + 0.35, 1.95):
                    measure = SymmetricStable(b=b, beta=beta)
                    exact = moment(measure, xi).value
                    quad = moment(measure, xi, method="quadrature")
                    self.assertTrue(quad.finite)
                    self.assertLess(abs(quad.value - exact) / exact, 1e-6)

    def test_quadrature_divergence(self) -> None:
        measure = SymmetricStable(b=1, beta=1.2)
        self.assertFalse(moment(measure, 1.15, method="quadrature").finite)
        self.assertFalse(moment(measure, 1.2, method="quadrature").finite)

    def test_bg_consistency(self) -> None:
        for measure in (
            SymmetricStable(b=1, beta=0.8),
            LogDampedStable(b=1, beta=0.8),
        ):
            beta = bg_index(measure).beta
            for xi in (beta + 0.06, beta + 0.5, 2.0):
                self.assertTrue(moment(measure, xi).finite)
            for xi in (0.0, beta / 2, beta - 0.06):
                self.assertFalse(moment(measure, xi).finite)

    def test_log_damped_boundary_moment(self) -> None:
        value = moment(LogDampedStable(b=1, beta=0.8), 0.8)
        self.assertTrue(value.finite)
        # 2 int_0^inf ds/(s^2+1) = pi for the small jumps
        small = small_jump_moment(LogDampedStable(b=1, beta=0.8), 0.8)
        self.assertAlmostEqual(small.value, math.pi, places=6)

    def test_linear_in_b(self) -> None:
        one = moment(LogDampedStable(b=1, beta=1.1), 1.5).value
        two = moment(LogDampedStable(b=2, beta=1.1), 1.5).value
        self.assertAlmostEqual(two, 2 * one, places=8)

    def test_small_jump_monotone(self) -> None:
        measure = LogDampedStable(b=1, beta=0.5)
        values = [small_jump_moment(measure, xi).value for xi in (0.6, 1.0, 1.5, 2.0)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_generic_density_moment(self) -> None:
        generic = GenericDensity(h=lambda x: abs(x) ** -1.5)
        stable = SymmetricStable(b=1, beta=0.5)
        self.assertAlmostEqual(
            moment(generic, 1.0).value, moment(stable, 1.0).value, places=5
        )


class TestTruncatedMoments(unittest.TestCase):
    def test_stable(self) -> None:
        measure = SymmetricStable(b=1, beta=0.5)
        self.assertAlmostEqual(truncated_abs_moment(measure, 1, 1), 4.0)
        self.assertEqual(truncated_abs_moment(measure, 0.5, 1), math.inf)

    def test_log_damped_matches_small_jump_moment(self) -> None:
        measure = LogDampedStable(b=1, beta=0.5)
        self.assertAlmostEqual(
            truncated_abs_moment(measure, 1.0, 1.0),
            small_jump_moment(measure, 1.0).value,
            places=8,
        )

    def test_finite_discrete(self) -> None:
        measure = FiniteDiscrete(atoms=((2, 1), (-0.5, 4)))
        self.assertAlmostEqual(truncated_abs_moment(measure, 1, 1), 2.0)
        self.assertEqual(truncated_abs_moment(measure, 1, 0.25), 0.0)

    def test_tail_mass(self) -> None:
        self.assertAlmostEqual(tail_mass(SymmetricStable(b=1, beta=0.5)), 4.0)
        self.assertEqual(tail_mass(FiniteDiscrete(atoms=((2, 1), (-0.5, 4)))), 1.0)


class TestBGIndex(unittest.TestCase):
    def test_analytic(self) -> None:
        index = bg_index(SymmetricStable(b=3, beta=1.2))
        self.assertEqual(index.beta, 1.2)
        self.assertEqual(index.source, "analytic")
        self.assertFalse(index.boundary_moment_finite)

        index = bg_index(FiniteDiscrete(atoms=((2, 1), (-0.5, 4))))
        self.assertEqual(index.beta, 0)
        self.assertEqual(index.source, "analytic")

        index = bg_index(LogDampedStable(b=1, beta=0.8))
        self.assertEqual(index.beta, 0.8)
        self.assertTrue(index.boundary_moment_finite)

    def test_estimated(self) -> None:
        index = bg_index(GenericDensity(h=lambda x: abs(x) ** -2.3))
        self.assertEqual(index.source, "estimated")
        self.assertLess(abs(index.beta - 1.3), 0.05)
        self.assertLess(index.fit_residual, 0.05)

    def test_estimated_finite_activity(self) -> None:
        index = bg_index(GenericDensity(h=lambda x: math.exp(-abs(x))))
        self.assertLess(index.beta, 0.1)


class TestHartmanWintner(unittest.TestCase):
    def test_cauchy_measure(self) -> None:
        value = hartman_wintner_ratio(SymmetricStable(b=1, beta=1), math.e)
        self.assertLess(abs(value - math.pi * math.e) / (math.pi * math.e), 1e-3)

    def test_finite_discrete(self) -> None:
        u = math.exp(10)
        value = hartman_wintner_ratio(FiniteDiscrete(atoms=((1, 5),)), u)
        self.assertAlmostEqual(value, 5 * math.sin(u) ** 2 / 10)
        self.assertLessEqual(value, 0.5)

    def test_growth(self) -> None:
        self.assertGreater(
            hartman_wintner_ratio(SymmetricStable(b=1, beta=0.5), 1e6), 10
        )

    def test_invalid_u(self) -> None:
        with self.assertRaises(SpecValidationError):
            hartman_wintner_ratio(SymmetricStable(b=1, beta=1), 0.5)

    def test_liminf(self) -> None:
        report = hartman_wintner_liminf(
            SymmetricStable(b=1, beta=1), u_grid=(10.0, 100.0, 1000.0)
        )
        self.assertTrue(report.bounded_density_criterion)
        report = hartman_wintner_liminf(
            FiniteDiscrete(atoms=((1, 1),)), u_grid=(10.0, 100.0, 1000.0)
        )
        self.assertFalse(report.bounded_density_criterion)


class TestCharScale(unittest.TestCase):
    def test_cauchy(self) -> None:
        self.assertAlmostEqual(nu_to_char_scale(1 / math.pi, 1), 1.0, places=8)

    def test_round_trip(self) -> None:
        for b, beta in ((1, 0.5), (0.3, 1.0), (2.5, 1.7), (1, 0.2)):
            c = nu_to_char_scale(b, beta)
            self.assertLess(abs(char_scale_to_nu(c, beta) - b), 1e-10)

    def test_closed_form(self) -> None:
        for beta in (0.3, 0.5, 1.0, 1.5, 1.9):
            self.assertAlmostEqual(
                nu_to_char_scale(1, beta) / char_scale_closed_form(1, beta),
                1.0,
                places=7,
            )
        # 2 * sqrt(2 pi)
        self.assertAlmostEqual(nu_to_char_scale(1, 0.5), 5.0132565, places=5)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
