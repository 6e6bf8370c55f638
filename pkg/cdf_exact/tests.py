import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from unittest import mock

import mpmath
import numpy as np
from django.test import SimpleTestCase
from scipy import integrate
from scipy.special import eval_jacobi

from cdf_exact import densities, distributions, precise
from cdf_exact.config import Probability, SpikedFConfig
from cdf_exact.densities import joint_density_null, joint_density_spiked
from cdf_exact.distributions import cdf_alpha0_spiked, cdf_max_null, cdf_max_spiked, weak_spike_applies
from cdf_exact.entries import omega_argument, omega_entry, omega_tracked, phi_entry, psi_entry
from linalg_core.decompositions import logdet_scaled
from special_functions.exceptions import InvalidParameterError, NumericalInstabilityError
from special_functions.logscaled import log_sum


def rel_gap(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def alpha0_hypergeometric(x, m, n, eta):
    """The p = m c.d.f. with mpmath's own 2F1 instead of the finite reduction."""
    x, eta = mpmath.mpf(x), mpmath.mpf(eta)
    fact = mpmath.factorial
    z = -eta * x / (1 + eta + x)
    lead = (
        fact(n) * (1 + eta) ** m * x ** (m * (n - 1) + 1)
        / (fact(m - 1) * eta ** (m - 1) * (1 + x) ** (m * n - m - n) * (1 + eta + x) ** (n + 1))
    )
    first = lead * mpmath.fsum(
        (-1) ** k * fact(m + k - 1) / (fact(k) * fact(k + 1) * fact(n - k - 1))
        * mpmath.hyp2f1(n + 1, k + 1, k + 2, z)
        for k in range(n)
    )
    c = eta / (1 + eta)
    second = (-1) ** n / (fact(n - 1) * eta ** n) * mpmath.fsum(
        fact(n + k - 1) * (x / (1 + x)) ** (n * (m - 1) - k) / (fact(k) * c ** k)
        for k in range(m - n)
    )
    return first + second


# ==================== CONFIG ====================

class SpikedFConfigTests(SimpleTestCase):

    def test_derived_quantities(self):
        cfg = SpikedFConfig(m=10, n=5, p=15, eta=10)
        self.assertEqual(cfg.alpha, 5)
        self.assertEqual(cfg.beta, 5)
        self.assertAlmostEqual(cfg.c_eta, 10 / 11, places=15)
        self.assertAlmostEqual(cfg.kappa, 1 / 3, places=15)

    def test_rejects_sample_sufficient(self):
        with self.assertRaisesMessage(InvalidParameterError, 'requires m > n'):
            SpikedFConfig(m=5, n=5, p=5)

    def test_rejects_short_noise_record(self):
        with self.assertRaisesMessage(InvalidParameterError, 'requires p >= m'):
            SpikedFConfig(m=5, n=2, p=4)

    def test_rejects_bad_eta_and_limits(self):
        with self.assertRaises(InvalidParameterError):
            SpikedFConfig(m=4, n=2, p=5, eta=-1)
        with self.assertRaises(InvalidParameterError):
            SpikedFConfig(m=4, n=2, p=5, eta=math.inf)
        with self.assertRaises(InvalidParameterError):
            SpikedFConfig(m=300, n=2, p=300)
        with self.assertRaises(InvalidParameterError):
            SpikedFConfig(m=4, n=2, p=60)

    def test_with_eta(self):
        cfg = SpikedFConfig(m=4, n=2, p=5).with_eta(3)
        self.assertEqual(cfg.eta, 3.0)


class ProbabilityTests(SimpleTestCase):

    def test_clamps_small_overshoot(self):
        self.assertEqual(Probability(1 + 5e-10), 1.0)
        self.assertEqual(Probability(-5e-10), 0.0)

    def test_rejects_large_overshoot(self):
        with self.assertRaises(InvalidParameterError):
            Probability(1.01)
        with self.assertRaises(InvalidParameterError):
            Probability(float('nan'))


# ==================== ENTRIES ====================

class PsiEntryTests(SimpleTestCase):

    def test_endpoint(self):
        cfg = SpikedFConfig(m=4, n=2, p=5)
        self.assertAlmostEqual(psi_entry(1, 2, 1.0, cfg).to_float(), 1.0, places=14)

    def test_linear_jacobi(self):
        # P_1^(0,2)(3) = 1 + 4 * (3 - 1) / 2
        cfg = SpikedFConfig(m=3, n=1, p=4)
        self.assertAlmostEqual(psi_entry(2, 2, 0.5, cfg).to_float(), 5.0, places=13)

    def test_against_scipy_jacobi(self):
        cfg = SpikedFConfig(m=6, n=3, p=9)
        for i in range(1, 5):
            for j in range(2, 5):
                y = 0.4
                expected = math.prod(range(cfg.m + i - 1, cfg.m + i - 1 + j - 2)) * eval_jacobi(
                    cfg.n + i - j, j - 2, cfg.beta + j - 2, 2 / y - 1
                )
                self.assertLess(rel_gap(psi_entry(i, j, y, cfg).to_float(), expected), 1e-11, (i, j))

    def test_negative_degree_rejected(self):
        cfg = SpikedFConfig(m=4, n=1, p=6)
        with self.assertRaises(InvalidParameterError):
            psi_entry(1, 3, 0.5, cfg)

    def test_index_range(self):
        cfg = SpikedFConfig(m=4, n=2, p=5)
        with self.assertRaises(InvalidParameterError):
            psi_entry(3, 2, 0.5, cfg)
        with self.assertRaises(InvalidParameterError):
            psi_entry(1, 1, 0.5, cfg)


class PhiEntryTests(SimpleTestCase):

    def test_single_term(self):
        cfg = SpikedFConfig(m=3, n=2, p=4, eta=1)
        # 3! 2! / 3!
        self.assertAlmostEqual(phi_entry(2, 0.3, cfg).to_float(), 2.0, places=13)

    def test_two_terms(self):
        cfg = SpikedFConfig(m=3, n=1, p=3, eta=1)
        # 2!0!/(0!1!) + 1!1!/(1!0! * 1/4)
        exact = Fraction(2) + Fraction(1, 1) / Fraction(1, 4)
        self.assertAlmostEqual(phi_entry(1, 0.5, cfg).to_float(), float(exact), places=13)

    def test_scaled_entry_is_polynomial(self):
        cfg = SpikedFConfig(m=5, n=2, p=6, eta=2)
        ys = np.linspace(0.1, 0.9, 7)
        values = np.array([phi_entry(2, y, cfg).to_float() * y ** (cfg.beta - 1) for y in ys])
        coefs = np.polyfit(ys, values, cfg.beta - 1)
        self.assertLess(np.max(np.abs(np.polyval(coefs, ys) - values)), 1e-10 * np.max(np.abs(values)))

    def test_rejects_null(self):
        with self.assertRaises(InvalidParameterError):
            phi_entry(1, 0.5, SpikedFConfig(m=3, n=1, p=3))


class OmegaEntryTests(SimpleTestCase):

    def omega_at_zero(self, i, cfg):
        top = cfg.n + i - 2
        total = sum(
            Fraction((-1) ** k * math.factorial(cfg.m + i + k - 2),
                     math.factorial(top - k) * math.factorial(k) * math.factorial(k + 1))
            for k in range(top + 1)
        )
        return total * Fraction(math.factorial(top), math.factorial(cfg.m + i - 2))

    def omega_by_quadrature(self, i, y, cfg):
        power = cfg.n + cfg.alpha + 1
        cy = cfg.c_eta * y
        value, _ = integrate.quad(
            lambda s: eval_jacobi(cfg.n + i - 2, 0, cfg.beta, 2 * s - 1) / (1 - cy * s) ** power,
            0, 1, epsabs=1e-14, epsrel=1e-13, limit=200,
        )
        return value * (1 - cy) ** power

    def test_zero_argument(self):
        cfg = SpikedFConfig(m=5, n=3, p=7, eta=4)
        for i in range(1, cfg.alpha + 2):
            self.assertAlmostEqual(omega_entry(i, 0.0, cfg), float(self.omega_at_zero(i, cfg)), places=12)

    def test_single_term_against_integral(self):
        cfg = SpikedFConfig(m=4, n=1, p=6, eta=3)
        for y in (0.2, 0.5, 0.9):
            self.assertLess(rel_gap(omega_entry(1, y, cfg), self.omega_by_quadrature(1, y, cfg)), 1e-10)

    def test_general_against_integral(self):
        for cfg in (SpikedFConfig(m=5, n=2, p=7, eta=2), SpikedFConfig(m=8, n=4, p=10, eta=10)):
            for i in range(1, cfg.alpha + 2):
                for y in (0.1, 0.5, 0.8):
                    expected = self.omega_by_quadrature(i, y, cfg)
                    value = omega_entry(i, y, cfg)
                    self.assertLess(abs(value - expected), 1e-9 * max(1.0, abs(expected)), (cfg, i, y))

    def test_argument(self):
        self.assertEqual(omega_argument(0.0, 5.0), 0.0)
        self.assertAlmostEqual(omega_argument(0.5, 1.0), -1 / 3, places=15)

    def test_domain(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=1)
        with self.assertRaises(InvalidParameterError):
            omega_entry(1, 1.0, cfg)
        with self.assertRaises(InvalidParameterError):
            omega_entry(1, 0.5, cfg.with_eta(0))


# ==================== NULL C.D.F. ====================

class NullCdfTests(SimpleTestCase):

    def test_alpha_zero_power(self):
        self.assertAlmostEqual(cdf_max_null(1, SpikedFConfig(m=3, n=2, p=3)), 0.015625, places=14)

    def test_endpoints(self):
        cfg = SpikedFConfig(m=4, n=2, p=5)
        self.assertEqual(cdf_max_null(0, cfg), 0.0)
        self.assertEqual(cdf_max_null(math.inf, cfg), 1.0)

    def test_rejects_negative_x(self):
        with self.assertRaises(InvalidParameterError):
            cdf_max_null(-1, SpikedFConfig(m=4, n=2, p=5))

    def test_tends_to_one(self):
        for m, n, p in ((4, 2, 5), (10, 3, 15), (10, 5, 15), (6, 1, 9)):
            self.assertLess(abs(cdf_max_null(1e8, SpikedFConfig(m=m, n=n, p=p)) - 1), 1e-6, (m, n, p))

    def test_single_sample_against_density(self):
        cfg = SpikedFConfig(m=4, n=1, p=5)
        for x in (0.5, 1.0, 2.0, 5.0):
            expected, _ = integrate.quad(lambda lam: joint_density_null([lam], cfg), 0, x, epsabs=1e-14)
            self.assertLess(abs(cdf_max_null(x, cfg) - expected), 1e-9, x)

    def test_monotone(self):
        for cfg in (SpikedFConfig(m=4, n=2, p=5), SpikedFConfig(m=10, n=5, p=15)):
            values = [cdf_max_null(x, cfg) for x in np.linspace(0.05, 30, 60)]
            self.assertTrue(np.all(np.diff(values) >= -1e-9))


# ==================== SPIKED C.D.F. ====================

class SpikedCdfTests(SimpleTestCase):

    def test_zero(self):
        self.assertEqual(cdf_max_spiked(0, SpikedFConfig(m=4, n=2, p=5, eta=2)), 0.0)

    def test_rejects_null_config(self):
        with self.assertRaises(InvalidParameterError):
            cdf_max_spiked(1.0, SpikedFConfig(m=4, n=2, p=5))

    def test_tends_to_one(self):
        for m, n, p, eta in ((4, 2, 5, 2), (10, 3, 15, 10), (10, 5, 15, 10), (8, 5, 8, 10)):
            cfg = SpikedFConfig(m=m, n=n, p=p, eta=eta)
            self.assertLess(abs(cdf_max_spiked(1e8, cfg) - 1), 1e-6, (m, n, p, eta))

    def test_monotone(self):
        for cfg in (SpikedFConfig(m=4, n=2, p=5, eta=2), SpikedFConfig(m=6, n=3, p=6, eta=5),
                    SpikedFConfig(m=10, n=5, p=15, eta=10)):
            values = [cdf_max_spiked(x, cfg) for x in np.linspace(1.0, 40, 40)]
            self.assertTrue(np.all(np.diff(values) >= -1e-9), cfg)

    def test_spike_shifts_mass_right(self):
        cfg = SpikedFConfig(m=10, n=7, p=15)
        for x in (2.0, 4.0, 8.0):
            low = cdf_max_spiked(x, cfg.with_eta(1))
            high = cdf_max_spiked(x, cfg.with_eta(100))
            self.assertLessEqual(high, low + 1e-12)
            self.assertLessEqual(low, cdf_max_null(x, cfg) + 1e-12)

    def test_weak_spike_continuity(self):
        for m, n, p in ((4, 2, 5), (6, 3, 6), (10, 5, 15)):
            cfg = SpikedFConfig(m=m, n=n, p=p, eta=1e-6)
            for x in (0.25, 0.5, 1.0, 2.0, 5.0, 10.0):
                self.assertLess(abs(cdf_max_spiked(x, cfg) - cdf_max_null(x, cfg)), 1e-4, (m, n, p, x))

    def test_single_sample_against_density(self):
        for cfg in (SpikedFConfig(m=4, n=1, p=5, eta=3), SpikedFConfig(m=6, n=1, p=6, eta=3)):
            for x in (0.5, 1.0, 2.0, 5.0):
                expected, _ = integrate.quad(
                    lambda lam: joint_density_spiked([lam], cfg), 0, x, epsabs=1e-14, epsrel=1e-12,
                )
                self.assertLess(abs(cdf_max_spiked(x, cfg) - expected), 1e-8, (cfg, x))

    def test_determinant_order_is_alpha_plus_one(self):
        for m, n, p in ((6, 2, 9), (40, 2, 43), (40, 30, 43)):
            cfg = SpikedFConfig(m=m, n=n, p=p, eta=5)
            with mock.patch.object(distributions, 'logdet_scaled', wraps=logdet_scaled) as spy:
                distributions.spiked_terms(3.0, cfg)
            self.assertEqual(spy.call_count, 2)
            for call in spy.call_args_list:
                columns = call.args[0]
                self.assertEqual(len(columns), 4)
                self.assertTrue(all(len(col) == 4 for col in columns))

    def test_band_gate_is_relative(self):
        self.assertTrue(weak_spike_applies(SpikedFConfig(m=10, n=5, p=15, eta=1e-6)))
        # at small x the band is narrow in absolute terms but not relatively
        self.assertFalse(weak_spike_applies(SpikedFConfig(m=4, n=2, p=5, eta=1e-3)))
        self.assertFalse(weak_spike_applies(SpikedFConfig(m=12, n=7, p=12, eta=100)))

    def test_strong_spike_never_uses_band(self):
        cfg = SpikedFConfig(m=12, n=7, p=12, eta=100)
        with self.assertNoLogs('cdf_exact.distributions', level='WARNING'):
            for x in (0.05, 0.2, 0.5):
                with mpmath.workdps(200):
                    expected = float(alpha0_hypergeometric(x, 12, 7, 100))
                self.assertLess(rel_gap(cdf_max_spiked(x, cfg), expected), 1e-9, x)

    def test_inner_cancellation_reaches_monitor(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=10)

        def lossy_omega(i, y, cfg):
            value, _ = omega_tracked(i, y, cfg)
            return value, 8.0

        with mock.patch.object(distributions, 'omega_tracked', side_effect=lossy_omega), \
                mock.patch.object(distributions, 'cdf_spiked_precise',
                                  wraps=distributions.cdf_spiked_precise) as spy:
            value = cdf_max_spiked(5.0, cfg)
        spy.assert_called_once()
        self.assertLess(rel_gap(value, cdf_max_spiked(5.0, cfg)), 1e-9)


# ==================== EXTENDED PRECISION ====================

class ExtendedPrecisionTests(SimpleTestCase):

    def test_matches_double_precision(self):
        cfg = SpikedFConfig(m=6, n=3, p=8, eta=10)
        for x in (1.0, 5.0, 20.0):
            self.assertLess(rel_gap(precise.cdf_spiked_precise(x, cfg), cdf_max_spiked(x, cfg)), 1e-9, x)

    def test_global_precision_untouched(self):
        before = mpmath.mp.dps
        precise.cdf_alpha0_precise(0.2, 12, 7, 0.5)
        self.assertEqual(mpmath.mp.dps, before)

    def test_threads_agree_with_serial(self):
        cfg = SpikedFConfig(m=10, n=5, p=15, eta=0.5)
        xs = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0]
        serial = [precise.cdf_spiked_precise(x, cfg) for x in xs]
        with ThreadPoolExecutor(max_workers=4) as pool:
            parallel = list(pool.map(lambda x: precise.cdf_spiked_precise(x, cfg), xs))
        self.assertEqual(serial, parallel)

    def test_gives_up_above_cap(self):
        with mock.patch.object(precise, 'MAX_DPS', 30):
            with self.assertRaises(NumericalInstabilityError):
                precise.cdf_alpha0_precise(0.2, 12, 7, 0.5)

    def test_density_factor(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=3)
        lambdas = np.array([0.5, 2.0])
        expected = log_sum(densities._g_terms(lambdas, cfg))
        g = precise.density_g_precise(lambdas, cfg)
        self.assertEqual(g.sign, expected.sign)
        self.assertLess(abs(g.log_mag - expected.log_mag), 1e-9)


class Alpha0ClosedFormTests(SimpleTestCase):

    def test_zero(self):
        self.assertEqual(cdf_alpha0_spiked(0, 8, 5, 10), 0.0)

    def test_rejects_null(self):
        with self.assertRaises(InvalidParameterError):
            cdf_alpha0_spiked(1.0, 8, 5, 0)

    def test_matches_determinant_formula(self):
        for m, n in ((4, 2), (8, 5), (12, 7)):
            for eta in (10.0, 100.0):
                cfg = SpikedFConfig(m=m, n=n, p=m, eta=eta)
                for x in (1.0, 2.0, 5.0, 10.0, 40.0):
                    closed = cdf_alpha0_spiked(x, m, n, eta)
                    self.assertLess(rel_gap(cdf_max_spiked(x, cfg), closed), 1e-9, (m, n, eta, x))

    def test_matches_determinant_formula_weak_spike(self):
        for m, n in ((4, 2), (8, 5), (12, 7)):
            cfg = SpikedFConfig(m=m, n=n, p=m, eta=0.5)
            for x in (0.2, 0.5, 2.0, 5.0, 10.0, 40.0):
                closed = cdf_alpha0_spiked(x, m, n, 0.5)
                self.assertLess(rel_gap(cdf_max_spiked(x, cfg), closed), 1e-9, (m, n, x))

    def test_against_hypergeometric_series(self):
        for m, n in ((4, 3), (8, 5), (12, 7)):
            for eta in (0.5, 10.0, 100.0):
                cfg = SpikedFConfig(m=m, n=n, p=m, eta=eta)
                for x in (0.2, 0.5, 1.0, 3.0, 10.0):
                    with mpmath.workdps(150):
                        expected = float(alpha0_hypergeometric(x, m, n, eta))
                    self.assertLess(rel_gap(cdf_alpha0_spiked(x, m, n, eta), expected), 1e-9, (m, n, eta, x))
                    self.assertLess(rel_gap(cdf_max_spiked(x, cfg), expected), 1e-9, (m, n, eta, x))

    def test_roc_power_at_small_false_alarm(self):
        # pd = 1 - F(x) at the pf = 0.01 threshold, m = 6, n = 3, gamma = 10
        log_u = math.log1p(-0.01) / 18
        x = math.exp(log_u) / -math.expm1(log_u)
        with mpmath.workdps(150):
            expected = 1.0 - float(alpha0_hypergeometric(x, 6, 3, 10.0))
        self.assertLess(abs((1.0 - cdf_alpha0_spiked(x, 6, 3, 10.0)) - expected), 1e-9)

    def test_cancelled_terms_are_recomputed(self):
        with mock.patch.object(distributions, 'cdf_alpha0_precise', wraps=distributions.cdf_alpha0_precise) as spy:
            value = cdf_alpha0_spiked(0.2, 12, 7, 0.5)
        spy.assert_called_once()
        with mpmath.workdps(150):
            self.assertLess(rel_gap(value, float(alpha0_hypergeometric(0.2, 12, 7, 0.5))), 1e-9)

    def test_single_sample_against_density(self):
        cfg = SpikedFConfig(m=5, n=1, p=5, eta=4)
        for x in (0.5, 2.0, 8.0):
            expected, _ = integrate.quad(lambda lam: joint_density_spiked([lam], cfg), 0, x, epsabs=1e-14)
            self.assertLess(abs(cdf_alpha0_spiked(x, 5, 1, 4) - expected), 1e-8, x)


# ==================== DENSITIES ====================

def ordered_pair_integral(density, cfg, margin=1e-6):
    """Integrate a two-eigenvalue density over 0 < lambda_1 < lambda_2 in y = lambda/(1+lambda)."""

    def integrand(y2, y1):
        l1, l2 = y1 / (1 - y1), y2 / (1 - y2)
        return density([l1, l2], cfg) / ((1 - y1) ** 2 * (1 - y2) ** 2)

    value, _ = integrate.dblquad(integrand, 0, 1 - 2 * margin, lambda y1: y1 + margin, lambda y1: 1.0,
                                 epsabs=1e-10, epsrel=1e-9)
    return value


class DensityTests(SimpleTestCase):

    def test_single_sample_normalization(self):
        for cfg in (SpikedFConfig(m=2, n=1, p=2), SpikedFConfig(m=4, n=1, p=5, eta=3)):
            density = joint_density_spiked if cfg.eta > 0 else joint_density_null
            total, _ = integrate.quad(lambda lam: density([lam], cfg), 0, np.inf, epsabs=1e-13, epsrel=1e-11)
            self.assertLess(abs(total - 1), 1e-8, cfg)

    def test_closed_form_small_case(self):
        # m = 2, n = 1, p = 2: f(lambda) = 2 lambda / (1 + lambda)^3
        cfg = SpikedFConfig(m=2, n=1, p=2)
        self.assertAlmostEqual(joint_density_null([1.0], cfg), 0.25, places=14)

    def test_two_sample_normalization(self):
        self.assertLess(abs(ordered_pair_integral(joint_density_null, SpikedFConfig(m=4, n=2, p=5)) - 1), 1e-6)
        self.assertLess(
            abs(ordered_pair_integral(joint_density_spiked, SpikedFConfig(m=4, n=2, p=5, eta=2)) - 1), 1e-6,
        )

    def test_weak_spike_limit(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=1e-8)
        for lambdas in ([0.3, 1.2], [0.8, 4.0], [2.0, 2.5]):
            self.assertLess(rel_gap(joint_density_spiked(lambdas, cfg), joint_density_null(lambdas, cfg)), 1e-4)

    def test_rejects_bad_eigenvalues(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=2)
        with self.assertRaises(InvalidParameterError):
            joint_density_spiked([1.0, 1.0], cfg)
        with self.assertRaises(InvalidParameterError):
            joint_density_spiked([2.0, 1.0], cfg)
        with self.assertRaises(InvalidParameterError):
            joint_density_spiked([1.0], cfg)
        with self.assertRaises(InvalidParameterError):
            joint_density_null([-1.0, 1.0], cfg)
        with self.assertRaises(InvalidParameterError):
            joint_density_spiked([1.0, 2.0], cfg.with_eta(0))
