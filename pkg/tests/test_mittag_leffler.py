"""This is the test module for the mittag_leffler module."""

import math
import unittest

import mpmath
import numpy as np

from fracschrod.errors import DomainError, GammaOverflowError
from fracschrod.mittag_leffler import TERM_RTOL, MLParams, gamma_fn, mittag_leffler, ml_gaussian_profile


def _extended_precision(q: float, x: float) -> float:
    """E_q(x) summed at 50 significant digits."""
    with mpmath.workdps(50):
        q_mp, x_mp = mpmath.mpf(q), mpmath.mpf(x)
        total = mpmath.fsum(x_mp**k / mpmath.gamma(q_mp * k + 1) for k in range(300))
        return float(total)


class TestGamma(unittest.TestCase):
    """
    Test case for gamma_fn.
    """

    def test_factorials(self):
        """Gamma(n + 1) = n!."""
        self.assertAlmostEqual(gamma_fn(5.0), 24.0, places=10)
        self.assertAlmostEqual(gamma_fn(0.5), math.sqrt(math.pi), places=14)

    def test_domain(self):
        """Non-positive arguments are rejected and large ones overflow."""
        with self.assertRaises(DomainError):
            gamma_fn(0.0)
        with self.assertRaises(DomainError):
            gamma_fn(-1.5)
        with self.assertRaises(GammaOverflowError):
            gamma_fn(200.0)


class TestMittagLeffler(unittest.TestCase):
    """
    Test case for the series evaluation.
    """

    def test_reduces_to_gaussian(self):
        """E_1(-x^2) = exp(-x^2) for |x| <= 3, within the reported error."""
        params = MLParams(1.0)
        for x in np.linspace(0.0, 3.0, 31):
            result = mittag_leffler(params, -x * x)
            self.assertLessEqual(abs(result.value - math.exp(-x * x)), max(1e-12, result.error), msg=f"x = {x}")
            self.assertLess(result.terms, 400)

    def test_value_at_zero(self):
        """E_{q,beta}(0) = 1 / Gamma(beta)."""
        for q, beta in ((0.9, 1.0), (1.1, 0.5), (2.0, 2.5)):
            result = mittag_leffler(MLParams(q, beta), 0.0)
            self.assertAlmostEqual(result.value, 1.0 / math.gamma(beta), places=14)

    def test_cosine_identity(self):
        """E_2(-x^2) = cos(x)."""
        params = MLParams(2.0)
        for x in (0.5, 1.0, 2.0, 3.0):
            self.assertAlmostEqual(mittag_leffler(params, -x * x).value, math.cos(x), places=12)

    def test_two_parameter_identity(self):
        """E_{1,2}(x) = (exp(x) - 1) / x."""
        result = mittag_leffler(MLParams(1.0, 2.0), 1.5)
        self.assertAlmostEqual(result.value, math.expm1(1.5) / 1.5, places=12)

    def test_error_estimate_is_positive(self):
        """Every value comes with a positive error bound."""
        result = mittag_leffler(MLParams(0.9), -4.0)
        self.assertGreater(result.error, 0.0)
        self.assertLess(result.error, 1e-6)

    def test_error_estimate_covers_a_tighter_tolerance(self):
        """Halving rtol moves the value by no more than the reported error."""
        for q in np.linspace(0.8, 2.0, 10):
            params = MLParams(float(q))
            for x in np.linspace(-8.0, 8.0, 10):
                coarse = mittag_leffler(params, float(x))
                fine = mittag_leffler(params, float(x), rtol=0.5 * TERM_RTOL)
                self.assertLessEqual(abs(fine.value - coarse.value), coarse.error, msg=f"q = {q}, x = {x}")

    def test_error_estimate_bounds_the_true_error(self):
        """The reported error bounds the distance to a 50-digit evaluation."""
        for q, x in ((0.9, -9.0), (0.9, -4.0), (1.1, -10.0), (1.5, 6.0), (2.0, -12.0)):
            result = mittag_leffler(MLParams(q), x)
            reference = _extended_precision(q, x)
            self.assertLess(result.error, 1e-6, msg=f"q = {q}, x = {x}")
            self.assertLessEqual(abs(result.value - reference), result.error, msg=f"q = {q}, x = {x}")

    def test_cancelling_series(self):
        """E_0.9(-9) sums alternating terms of size 1e4 down to a value near 0.01."""
        result = mittag_leffler(MLParams(0.9), -9.0)
        reference = _extended_precision(0.9, -9.0)
        self.assertLess(abs(result.value - reference), 1e-9)
        self.assertLess(result.error, 1e-8)
        self.assertGreater(result.error, abs(result.value - reference))

    def test_argument_domain(self):
        """|x| > 12 and non-finite arguments are rejected."""
        with self.assertRaises(DomainError):
            mittag_leffler(MLParams(1.0), -12.5)
        with self.assertRaises(DomainError):
            mittag_leffler(MLParams(1.0), float("inf"))

    def test_invalid_parameters(self):
        """q and beta must be positive."""
        with self.assertRaises(DomainError):
            MLParams(0.0)
        with self.assertRaises(DomainError):
            MLParams(1.0, -1.0)


class TestGaussianProfile(unittest.TestCase):
    """
    Test case for ml_gaussian_profile.
    """

    def test_q_above_one_has_a_node(self):
        """E_1.1(-x^2) changes sign for x in (0, 3.4]."""
        xs = np.linspace(0.05, 3.4, 68)
        values, errors = ml_gaussian_profile(1.1, xs)
        self.assertGreater(values[0], 0.0)
        self.assertLess(values[-1], 0.0)
        self.assertTrue(np.all(errors < 1e-6))

    def test_q_below_one_has_a_heavier_tail(self):
        """E_0.9(-x^2) exceeds exp(-x^2) on [1.5, 3]."""
        xs = np.linspace(1.5, 3.0, 16)
        values, _ = ml_gaussian_profile(0.9, xs)
        self.assertTrue(np.all(values > np.exp(-xs * xs)))

    def test_out_of_domain_sample(self):
        """A sample with x^2 > 12 names its index."""
        with self.assertRaisesRegex(DomainError, "sample 1"):
            ml_gaussian_profile(1.0, np.array([1.0, 4.0]))


if __name__ == "__main__":
    unittest.main()
