import math
from fractions import Fraction

import mpmath
from django.test import SimpleTestCase

from special_functions.exceptions import InvalidParameterError, NumericalInstabilityError
from special_functions.functions import (
    gauss_2f1_terminating,
    jacobi_p,
    jacobi_p_deriv,
    omega_2f1,
    pochhammer,
)
from special_functions.logscaled import (
    ONE,
    ZERO,
    LogScaled,
    cancellation_digits,
    log_factorial,
    log_sum,
)

mpmath.mp.dps = 50


def jacobi_recurrence(n, a, b, x):
    """Three-term recurrence in 50-digit arithmetic."""
    a, b, x = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(x)
    previous, current = mpmath.mpf(1), (a + 1) + (a + b + 2) * (x - 1) / 2
    if n == 0:
        return previous
    for k in range(2, n + 1):
        lead = 2 * k * (k + a + b) * (2 * k + a + b - 2)
        mid = (2 * k + a + b - 1) * ((2 * k + a + b) * (2 * k + a + b - 2) * x + a * a - b * b)
        tail = 2 * (k + a - 1) * (k + b - 1) * (2 * k + a + b)
        previous, current = current, (mid * current - tail * previous) / lead
    return current


def rel_err(value, reference):
    reference = float(reference)
    return abs(value - reference) / max(abs(reference), 1e-300)


# ==================== LOGSCALED ====================

class LogScaledTests(SimpleTestCase):

    def test_round_trip(self):
        for value in (1.0, -2.5, 1e-200, -3e250, 7.0):
            self.assertAlmostEqual(LogScaled.from_float(value).to_float() / value, 1.0, places=14)

    def test_zero_is_canonical(self):
        self.assertEqual(LogScaled.from_float(0.0), ZERO)
        self.assertEqual(LogScaled(0, 12.0), ZERO)
        self.assertTrue(ZERO.is_zero)
        self.assertFalse(bool(ZERO))

    def test_products_never_overflow(self):
        big = LogScaled(1, 800.0)
        quotient = (big * big) / (big * big * LogScaled.from_float(4.0))
        self.assertAlmostEqual(quotient.to_float(), 0.25, places=14)

    def test_overflow_on_exponentiation_raises(self):
        with self.assertRaises(NumericalInstabilityError):
            LogScaled(1, 1000.0).to_float()

    def test_signed_addition(self):
        total = LogScaled.from_float(5.0) + LogScaled.from_float(-3.0)
        self.assertAlmostEqual(total.to_float(), 2.0, places=14)
        self.assertEqual(LogScaled.from_float(2.0) - 2.0, ZERO)

    def test_sum_of_huge_terms(self):
        terms = [LogScaled(1, 1000.0), LogScaled(-1, 1000.0 + math.log(0.5))]
        total = log_sum(terms)
        self.assertAlmostEqual(total.log_mag, 1000.0 + math.log(0.5), places=10)
        self.assertEqual(total.sign, 1)

    def test_powers(self):
        self.assertAlmostEqual((LogScaled.from_float(-2.0) ** 3).to_float(), -8.0, places=12)
        self.assertEqual(ZERO ** 0, ONE)
        with self.assertRaises(InvalidParameterError):
            LogScaled.from_float(-2.0) ** 0.5

    def test_cancellation_digits(self):
        terms = [LogScaled.from_float(1.0), LogScaled.from_float(-(1.0 - 1e-6))]
        digits = cancellation_digits(terms, log_sum(terms))
        self.assertAlmostEqual(digits, 6.0, places=3)
        self.assertEqual(cancellation_digits(terms[:1], ZERO), math.inf)

    def test_log_factorial(self):
        self.assertAlmostEqual(log_factorial(10), math.log(3628800), places=10)
        with self.assertRaises(InvalidParameterError):
            log_factorial(-1)


# ==================== POCHHAMMER ====================

class PochhammerTests(SimpleTestCase):

    def test_empty_product(self):
        self.assertEqual(pochhammer(5, 0), ONE)

    def test_negative_integer_rule(self):
        self.assertAlmostEqual(pochhammer(-3, 2).to_float(), 6.0, places=12)
        self.assertEqual(pochhammer(-3, 4), ZERO)

    def test_negative_integer_zero_for_every_k_above_n(self):
        for n in range(0, 15):
            for k in range(n + 1, n + 6):
                self.assertEqual(pochhammer(-n, k).sign, 0, (n, k))

    def test_negative_integer_values(self):
        for n in range(0, 12):
            for k in range(0, n + 1):
                exact = (-1) ** k * math.factorial(n) // math.factorial(n - k)
                self.assertLess(rel_err(pochhammer(-n, k).to_float(), exact), 1e-13)

    def test_positive_and_fractional(self):
        self.assertAlmostEqual(pochhammer(3, 4).to_float(), 360.0, places=9)
        self.assertAlmostEqual(pochhammer(-2.5, 3).to_float(), -1.875, places=12)
        self.assertAlmostEqual(pochhammer(0.5, 2).to_float(), 0.75, places=13)

    def test_rejects_negative_order(self):
        with self.assertRaises(InvalidParameterError):
            pochhammer(2, -1)


# ==================== JACOBI ====================

class JacobiTests(SimpleTestCase):

    def test_degree_zero(self):
        self.assertEqual(jacobi_p(0, 0, 3, 0.7), 1.0)

    def test_endpoint_value(self):
        self.assertAlmostEqual(jacobi_p(4, 2, 1, 1.0), 15.0, places=11)

    def test_endpoint_identity(self):
        for a in range(0, 4):
            for n in range(0, 31):
                exact = Fraction(math.factorial(a + n), math.factorial(a) * math.factorial(n))
                self.assertLess(rel_err(jacobi_p(n, a, 2, 1.0), exact), 1e-12, (n, a))

    def test_small_degree_against_recurrence(self):
        value = jacobi_p(3, 0, 2, 0.2)
        self.assertLess(rel_err(value, jacobi_recurrence(3, 0, 2, 0.2)), 1e-12)

    def test_recurrence_oracle_outside_interval(self):
        # the determinants evaluate P at 2/y - 1 >= 1
        for n in (1, 5, 12, 20, 30):
            for a, b in ((0, 1), (2, 5), (4, 9)):
                for x in (1.0, 1.5, 3.0, 19.0):
                    reference = jacobi_recurrence(n, a, b, x)
                    self.assertLess(rel_err(jacobi_p(n, a, b, x), reference), 1e-12, (n, a, b, x))

    def test_recurrence_oracle_inside_interval(self):
        # the series alternates here; high degrees cancel dozens of digits
        for n in (0, 1, 2, 5, 6, 12, 20, 30):
            for a, b in ((1, 2), (0, 1), (2, 5), (4, 9), (0.5, 1.5)):
                for x in (-0.9, -0.3, 0.0, 0.45, 0.95, -1.0):
                    reference = jacobi_recurrence(n, a, b, x)
                    self.assertLess(rel_err(jacobi_p(n, a, b, x), reference), 1e-12, (n, a, b, x))

    def test_sign_changes_inside_interval(self):
        # P_30 has 30 roots in (-1, 1); the signs on a fine grid must follow them
        grid = [-0.995 + 0.0199 * i for i in range(101)]
        for x in grid:
            reference = jacobi_recurrence(30, 2, 5, x)
            self.assertEqual(math.copysign(1.0, jacobi_p(30, 2, 5, x)), math.copysign(1.0, float(reference)), x)

    def test_rejects_bad_parameters(self):
        with self.assertRaises(InvalidParameterError):
            jacobi_p(2, -1.5, 0, 0.3)
        with self.assertRaises(InvalidParameterError):
            jacobi_p(-1, 0, 0, 0.3)


class JacobiDerivativeTests(SimpleTestCase):

    def test_order_above_degree(self):
        self.assertEqual(jacobi_p_deriv(2, 0.5, 1.5, 3, 0.1), 0.0)

    def test_linear_legendre(self):
        self.assertAlmostEqual(jacobi_p_deriv(1, 0, 0, 1, 0.4), 1.0, places=13)

    def test_second_derivative_by_finite_difference(self):
        h, x = 1e-5, 0.3
        fd = (jacobi_p_deriv(5, 1, 2, 1, x + h) - jacobi_p_deriv(5, 1, 2, 1, x - h)) / (2 * h)
        exact = jacobi_p_deriv(5, 1, 2, 2, x)
        self.assertLess(abs(exact - fd), 1e-6 * max(1.0, abs(exact)))

    def test_first_derivative_on_grid(self):
        h = 1e-5
        for n, a, b in ((3, 0, 2), (5, 1, 2), (4, 2, 0)):
            for x in [-0.99 + 0.18 * i for i in range(12)]:
                fd = (jacobi_p(n, a, b, x + h) - jacobi_p(n, a, b, x - h)) / (2 * h)
                exact = jacobi_p_deriv(n, a, b, 1, x)
                self.assertLess(abs(exact - fd), 1e-6 * max(1.0, abs(exact)), (n, a, b, x))


# ==================== HYPERGEOMETRIC ====================

class TerminatingSeriesTests(SimpleTestCase):

    def test_single_term(self):
        self.assertEqual(gauss_2f1_terminating(0, 2.5, 3.5, -0.7), ONE)

    def test_two_terms(self):
        value = gauss_2f1_terminating(-1, 2.5, 3.5, -0.7).to_float()
        self.assertAlmostEqual(value, 1 - 2.5 * -0.7 / 3.5, places=14)

    def test_exact_rational_sum(self):
        z = Fraction(-1, 2)
        exact = sum(
            Fraction(math.prod(range(-3, -3 + k)) * math.prod(range(2, 2 + k)))
            / (math.factorial(k) * math.prod(range(4, 4 + k)))
            * z ** k
            for k in range(4)
        )
        value = gauss_2f1_terminating(-3, 2, 4, -0.5).to_float()
        self.assertLess(rel_err(value, exact), 1e-14)

    def test_against_extended_precision(self):
        for order in (2, 7, 15):
            for b, c, z in ((1.0, 3.0, -0.9), (2.5, 1.5, -0.4), (-1.5, 6.0, -0.3), (0.5, 2.0, 0.1)):
                reference = mpmath.hyp2f1(-order, b, c, z)
                value = gauss_2f1_terminating(-order, b, c, z).to_float()
                self.assertLess(rel_err(value, reference), 1e-11, (order, b, c, z))

    def test_rejects_non_terminating(self):
        with self.assertRaises(InvalidParameterError):
            gauss_2f1_terminating(1, 2, 3, 0.5)
        with self.assertRaises(InvalidParameterError):
            gauss_2f1_terminating(-2.5, 2, 3, 0.5)
        with self.assertRaises(InvalidParameterError):
            gauss_2f1_terminating(-2, 2, -3, 0.5)


class OmegaHypergeometricTests(SimpleTestCase):

    def test_at_zero(self):
        self.assertEqual(omega_2f1(1, 0, 0, 0.0), 1.0)

    def test_collapsed_series(self):
        self.assertAlmostEqual(omega_2f1(2, 0, 1, -0.25), 0.64, places=14)

    def test_against_direct_series(self):
        z = mpmath.mpf(-0.4)
        direct = mpmath.fsum(
            mpmath.rf(6, k) * mpmath.rf(2, k) / (mpmath.rf(3, k) * mpmath.factorial(k)) * z ** k
            for k in range(201)
        )
        self.assertLess(rel_err(omega_2f1(3, 2, 1, -0.4), direct), 1e-12)

    def test_euler_reduction_grid(self):
        for n in range(1, 8):
            for alpha in range(0, 13 - n):
                for k in range(0, n + alpha):
                    for z in (-0.9, -0.5, -0.1, 0.0):
                        reference = mpmath.hyp2f1(n + alpha + 1, k + 1, k + 2, z)
                        value = omega_2f1(n, alpha, k, z)
                        self.assertLess(rel_err(value, reference), 1e-11, (n, alpha, k, z))

    def test_domain(self):
        with self.assertRaises(InvalidParameterError):
            omega_2f1(2, 1, 0, 1.0)
        with self.assertRaises(InvalidParameterError):
            omega_2f1(2, 1, 3, -0.5)
