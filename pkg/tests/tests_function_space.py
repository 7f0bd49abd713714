from __future__ import annotations

import math
import unittest

import numpy as np
from scipy import integrate

from levysmooth.base import SpecValidationError
from levysmooth.function_space import *

UNIT_ATOM = NBVMixture(atoms=((0.0, 1.0),))


class TestFromDict(unittest.TestCase):
    def test_ciesielski_default_truncation(self) -> None:
        f = function_from_dict({"variant": "ciesielski", "alpha": 0.5})
        self.assertEqual(f.truncation, 104)
        self.assertEqual(f.ell, 0)
        self.assertEqual(function_from_dict(f.to_dict()), f)

    def test_smoothed_indicator(self) -> None:
        f = function_from_dict(
            {
                "variant": "smoothed_indicator",
                "theta": 0.75,
                "t": 0.2,
                "mixture": {"atoms": [[0, 1]], "density_pieces": [[1, 2, 0.5]]},
            }
        )
        self.assertEqual(f.mixture.density_pieces, ((1.0, 2.0, 0.5),))
        self.assertEqual(function_from_dict(f.to_dict()), f)

    def test_errors(self) -> None:
        with self.assertRaises(SpecValidationError) as cm:
            function_from_dict({"variant": "ciesielski", "alpha": 1.5})
        self.assertEqual(cm.exception.path, "function.alpha")

        with self.assertRaises(SpecValidationError) as cm:
            function_from_dict({"variant": "indicator"})
        self.assertEqual(cm.exception.path, "function.K")

        with self.assertRaises(SpecValidationError) as cm:
            function_from_dict({"variant": "spline"})
        self.assertEqual(cm.exception.path, "function.variant")

        with self.assertRaises(SpecValidationError) as cm:
            function_from_dict(
                {
                    "variant": "smoothed_indicator",
                    "theta": 0.75,
                    "t": 0.2,
                    "mixture": {"density_pieces": [[2, 1, 0.5]]},
                }
            )
        self.assertEqual(cm.exception.path, "function.mixture.density_pieces[0]")

        with self.assertRaises(SpecValidationError):
            Ciesielski(alpha=0.5, ell=3, truncation=2)
        with self.assertRaises(SpecValidationError):
            SmoothedIndicator(theta=0.4, t=0.5, mixture=UNIT_ATOM)

    def test_custom_not_serializable(self) -> None:
        with self.assertRaises(SpecValidationError):
            Custom(math.sin).to_dict()


class TestEvaluate(unittest.TestCase):
    def test_ciesielski(self) -> None:
        f = Ciesielski(alpha=0.5, ell=0, truncation=40)
        self.assertEqual(evaluate(f, 0.0), 0.0)
        self.assertEqual(evaluate(f, 0.5), 0.5)
        self.assertEqual(evaluate(f, 1.5), 0.5)

    def test_ciesielski_tail_bound(self) -> None:
        f = Ciesielski(alpha=0.5, ell=0, truncation=40)
        full = (1 / 3) / (1 - 2**-0.5)
        self.assertLessEqual(abs(evaluate(f, 1 / 3) - full), f.tail_bound)

    def test_indicator(self) -> None:
        f = Indicator(K=0)
        self.assertEqual(evaluate(f, 0.0), 1.0)
        self.assertEqual(evaluate(f, -1e-9), 0.0)

    def test_nbv_right_continuous(self) -> None:
        f = NBVMixture(atoms=((0.0, 1.0), (1.0, -0.5), (2.5, 2.0)))
        for u, _ in f.atoms:
            self.assertEqual(evaluate(f, u), evaluate(f, u + 1e-12))
        np.testing.assert_allclose(f([-1, 0, 1, 2.5]), [0, 1, 0.5, 2.5])

    def test_nbv_density(self) -> None:
        f = NBVMixture(density_pieces=((0.0, 2.0, 0.5),))
        np.testing.assert_allclose(f([-1, 1, 3]), [0, 0.5, 1.0])
        self.assertEqual(f.limits, (0.0, 1.0))

    def test_power_cap(self) -> None:
        f = PowerCap(alpha=0.5)
        np.testing.assert_allclose(f([-4, -0.25, 0, 0.25, 4]), [1, 0.5, 0, 0.5, 1])

    def test_constant(self) -> None:
        np.testing.assert_array_equal(Constant(2.0)(np.zeros(3)), [2, 2, 2])
        self.assertEqual(evaluate(Constant(2.0), 7.0), 2.0)


class TestHolderBounds(unittest.TestCase):
    def test_holder_constant_bound(self) -> None:
        self.assertAlmostEqual(holder_constant_bound(0.5), 8.2426, places=4)
        self.assertGreater(holder_constant_bound(0.999), 1e3)
        with self.assertRaises(SpecValidationError):
            holder_constant_bound(1.0)

    def test_random_pairs(self) -> None:
        alpha = 0.5
        f = Ciesielski(alpha=alpha)
        rng = np.random.default_rng(0)
        x = rng.random(10**6)
        y = x + 10 ** -rng.uniform(0, 6, size=x.size)
        ratios = np.abs(f(x) - f(y)) / np.abs(x - y) ** alpha
        self.assertLessEqual(ratios.max(), holder_constant_bound(alpha))

    def test_certificates(self) -> None:
        certificate = holder_certificate(PowerCap(alpha=0.3))
        self.assertEqual((certificate.sup_norm, certificate.seminorm), (1.0, 1.0))
        self.assertEqual(certificate.norm, 2.0)

        certificate = holder_certificate(Ciesielski(alpha=0.5))
        self.assertAlmostEqual(certificate.sup_norm, 1 / (2 * (1 - 2**-0.5)))
        self.assertAlmostEqual(certificate.seminorm, holder_constant_bound(0.5))

        certificate = holder_certificate(Constant(-2.0), alpha=0.5)
        self.assertEqual((certificate.sup_norm, certificate.seminorm), (2.0, 0.0))

        certificate = holder_certificate(
            NBVMixture(density_pieces=((0.0, 1.0, 3.0),)), alpha=0.5
        )
        self.assertEqual((certificate.sup_norm, certificate.seminorm), (3.0, 6.0))

    def test_no_certificate(self) -> None:
        with self.assertRaises(SpecValidationError):
            holder_certificate(Indicator(K=0), alpha=0.5)
        with self.assertRaises(SpecValidationError):
            holder_certificate(PowerCap(alpha=0.3), alpha=0.5)
        with self.assertRaises(SpecValidationError):
            holder_certificate(Indicator(K=0))


class TestNorms(unittest.TestCase):
    def test_single_atom(self) -> None:
        report = norms(UNIT_ATOM)
        self.assertEqual(report.bv_norm.value, 1.0)
        self.assertEqual(report.bv_norm.method, "exact")
        self.assertIsNone(report.holder_seminorm)

    def test_two_atoms(self) -> None:
        report = norms(NBVMixture(atoms=((0.0, 1.0), (1.0, -1.0))), alpha=0.5)
        self.assertEqual(report.bv_norm.value, 2.0)
        self.assertEqual(report.sup_norm.value, 1.0)
        self.assertEqual(report.holder_seminorm.value, math.inf)

    def test_merged_atoms(self) -> None:
        f = NBVMixture(atoms=((1.0, 1.0), (1.0, -1.0)), density_pieces=((0, 1, 1), (0, 1, -1)))
        self.assertEqual(f.total_variation, 0.0)
        self.assertEqual(f.lipschitz_constant, 0.0)

    def test_indicator(self) -> None:
        report = norms(Indicator(K=2), alpha=0.3)
        self.assertEqual(report.sup_norm.value, 1.0)
        self.assertEqual(report.bv_norm.value, 1.0)
        self.assertEqual(report.holder_seminorm.value, math.inf)

    def test_ciesielski(self) -> None:
        report = norms(Ciesielski(alpha=0.5), alpha=0.5, max_points=2**14)
        self.assertEqual(report.sup_norm.method, "grid-estimate")
        self.assertAlmostEqual(report.sup_norm.upper_bound, 1.7071, places=4)
        self.assertLessEqual(report.sup_norm.value, report.sup_norm.upper_bound)
        self.assertGreater(report.sup_norm.value, 1.1)
        self.assertLessEqual(
            report.holder_seminorm.value, report.holder_seminorm.upper_bound
        )
        self.assertEqual(report.bv_norm.value, math.inf)
        self.assertEqual(report.sup_norm.resolution, 2**-13)

    def test_power_cap_grid(self) -> None:
        _, holder, _ = grid_norms(PowerCap(alpha=0.5), alpha=0.5, max_points=2**14)
        self.assertLessEqual(holder.value, 1 + 1e-9)
        self.assertGreater(holder.value, 0.99)

    def test_power_cap_rougher_exponent(self) -> None:
        coarse = norms(PowerCap(alpha=0.5), alpha=0.8, max_points=2**12)
        fine = norms(PowerCap(alpha=0.5), alpha=0.8, max_points=2**16)
        self.assertGreater(fine.holder_seminorm.value, coarse.holder_seminorm.value)
        self.assertFalse(fine.holder_seminorm.converged)

        exact = norms(PowerCap(alpha=0.5), alpha=0.5)
        self.assertEqual(exact.holder_seminorm.value, 1.0)
        self.assertEqual(exact.holder_norm, 2.0)

    def test_custom(self) -> None:
        f = Custom(math.sin, bounds=(0.0, 2 * math.pi))
        report = norms(f, alpha=0.5, max_points=2**12)
        self.assertEqual(report.sup_norm.method, "grid-estimate")
        self.assertAlmostEqual(report.sup_norm.value, 1.0, places=6)
        self.assertAlmostEqual(report.bv_norm.value, 4.0, places=5)

    def test_custom_without_bounds(self) -> None:
        with self.assertLogs("levysmooth.function_space", level="WARNING"):
            report = norms(Custom(math.cos), max_points=2**12)
        self.assertEqual(report.sup_norm.domain, (-10.0, 10.0))
        self.assertEqual(report.function, {"variant": "custom"})

    def test_report_json(self) -> None:
        text = norms(Indicator(K=0), alpha=0.5).to_json()
        self.assertIn('"inf"', text)


class TestDisplacementEnergy(unittest.TestCase):
    def test_indicator(self) -> None:
        f = Indicator(K=0)
        self.assertAlmostEqual(displacement_energy(f, (-1, 1), 0.25), 0.25, places=14)
        self.assertAlmostEqual(displacement_energy(f, (-1, 1), -0.25), 0.25, places=14)
        self.assertAlmostEqual(displacement_energy(f, (-1, 1), 3.0), 1.0, places=14)

    def test_zero_shift(self) -> None:
        for f in (Indicator(K=0), Ciesielski(alpha=0.5), PowerCap(alpha=0.3)):
            self.assertEqual(displacement_energy(f, (0, 1), 0.0), 0.0)

    def test_nbv_density(self) -> None:
        f = NBVMixture(density_pieces=((0.0, 1.0, 1.0),))
        # (f(y+x) - f(y)) is x on [0, 1-x] and ramps down on [1-x, 1]
        x = 0.25
        exact = x**2 * (1 - x) + x**3 / 3 + x**3 / 3
        self.assertAlmostEqual(displacement_energy(f, (-1, 2), x), exact, places=14)

    def test_ciesielski(self) -> None:
        f = Ciesielski(alpha=0.5, ell=0)
        value = displacement_energy(f, (0, 1), 1 / 16)
        self.assertGreaterEqual(value, 1 / 1024)
        self.assertAlmostEqual(value, 0.03092448, places=7)
        self.assertAlmostEqual(
            displacement_energy(f, (0.25, 1.25), 1 / 16), value, places=12
        )
        halves = displacement_energy(f, (0, 0.5), 1 / 16) + displacement_energy(
            f, (0.5, 1), 1 / 16
        )
        self.assertAlmostEqual(halves, value, places=7)

    def test_ciesielski_lower_bound(self) -> None:
        for alpha in (0.3, 0.5, 0.8):
            for ell in (0, 2):
                f = Ciesielski(alpha=alpha, ell=ell)
                for k in range(ell + 3, ell + 24):
                    for x in (2.0**-k, 0.75 * 2.0**-k):
                        bound = 2.0**-ell * 2 ** (8 * alpha - 10) * x ** (2 * alpha)
                        self.assertGreaterEqual(
                            displacement_energy(f, (0, f.period), x), bound
                        )

    def test_ciesielski_orthogonality(self) -> None:
        f = Ciesielski(alpha=0.5)
        x = 0.1
        for n, m in ((0, 1), (1, 3), (2, 4)):
            period = 2.0**-n
            grid = np.arange(0, 2 ** (m + 1) * period + 1) / 2 ** (m + 1)
            cuts = np.unique(
                np.clip(np.concatenate([grid, grid - x, [0, period]]), 0, period)
            )

            def integrand(y: float) -> float:
                return float(
                    (f.component(n, y + x) - f.component(n, y))
                    * (f.component(m, y + x) - f.component(m, y))
                )

            total = sum(
                integrate.quad(integrand, a, b)[0] for a, b in zip(cuts[:-1], cuts[1:])
            )
            self.assertLess(abs(total), 1e-10)

    def test_power_cap_quadrature(self) -> None:
        f = PowerCap(alpha=0.5)
        value = displacement_energy(f, (-2, 2), 0.1)
        reference, _ = integrate.quad(
            lambda y: float(f(y + 0.1) - f(y)) ** 2,
            -2,
            2,
            points=[-1.1, -1, -0.1, 0, 0.9, 1],
            limit=200,
        )
        self.assertAlmostEqual(value, reference, places=10)

    def test_invalid_interval(self) -> None:
        with self.assertRaises(SpecValidationError):
            displacement_energy(Indicator(K=0), (1, 1), 0.5)


class TestSmoothing(unittest.TestCase):
    def test_kernel(self) -> None:
        for theta, t in ((0.5, 0.3), (0.75, 0.2), (0.9, 0.6)):
            self.assertEqual(float(smoothing_kernel(theta, t, t ** (2 * theta))), 1.0)
            self.assertEqual(float(smoothing_kernel(theta, t, 0.0)), 0.0)
            self.assertEqual(float(smoothing_kernel(theta, t, -1.0)), 0.0)
            self.assertLess(float(smoothing_kernel(theta, t, 1e-12)), 1e-5)
            self.assertEqual(float(smoothing_kernel(theta, t, 5.0)), 1.0)

    def test_shift_energy_linear_ramp(self) -> None:
        t, x = 0.5, 0.1
        exact = x**2 * (t - x) / t**2 + 2 * x**3 / (3 * t**2)
        self.assertAlmostEqual(kernel_shift_energy(0.5, t, x), exact, places=10)
        self.assertAlmostEqual(kernel_shift_energy(0.5, t, -x), exact, places=10)

    def test_shift_energy_bound(self) -> None:
        for theta in (0.5, 0.7, 0.9):
            for t in (0.1, 0.5, 0.9):
                decomposition = smoothing_decomposition(UNIT_ATOM, theta, t)
                for x in (1e-4, 1e-2, 0.3, 2.0):
                    self.assertLessEqual(
                        kernel_shift_energy(theta, t, x),
                        float(decomposition.energy_bound(x)),
                    )

    def test_smoothed_atom(self) -> None:
        f = SmoothedIndicator(theta=0.7, t=0.3, mixture=NBVMixture(atoms=((1.0, 2.0),)))
        y = np.linspace(0, 2, 11)
        np.testing.assert_allclose(f(y), 2 * smoothing_kernel(0.7, 0.3, y - 1))

    def test_smoothed_density(self) -> None:
        theta, t = 0.6, 0.4
        f = SmoothedIndicator(theta, t, NBVMixture(density_pieces=((0.0, 1.0, 1.0),)))
        for x in (0.05, 0.5, 1.2):
            reference, _ = integrate.quad(
                lambda u: float(smoothing_kernel(theta, t, x - u)), 0, 1, limit=200
            )
            self.assertAlmostEqual(float(f(x)), reference, places=8)

    def test_decomposition(self) -> None:
        decomposition = smoothing_decomposition(UNIT_ATOM, 0.75, 0.25)
        self.assertAlmostEqual(decomposition.tau, 0.125)
        self.assertEqual(float(decomposition.remainder(0.2)), 0.0)
        self.assertEqual(float(decomposition.remainder(-0.2)), 0.0)
        self.assertGreater(float(decomposition.remainder(0.01)), 0.0)
        self.assertEqual(float(decomposition.increment_bound(1.0)), 1.0)
        self.assertAlmostEqual(float(decomposition.support_length(-0.1)), 0.225)


class TestPowerCapRegimes(unittest.TestCase):
    def test_values(self) -> None:
        self.assertAlmostEqual(
            powercap_regime_bound(0.25, 0.5, 1.0), 0.5**1.5 * 4.25, places=12
        )
        self.assertAlmostEqual(
            powercap_regime_bound(0.5, 0.5, 2.0), 2 * 0.25 * (4 + 2 * math.log(4)), places=12
        )
        self.assertAlmostEqual(
            powercap_regime_bound(0.75, 0.25, 1.0),
            0.25**2.5 * (4 + 2**1.5 * 0.5625 * 0.25**-0.5 / 0.5),
            places=12,
        )

    def test_invalid(self) -> None:
        with self.assertRaises(SpecValidationError):
            powercap_regime_bound(0.25, 2.0, 1.0)
        with self.assertRaises(SpecValidationError):
            powercap_regime_bound(0.25, 0.0, 1.0)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
