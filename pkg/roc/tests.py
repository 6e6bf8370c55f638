import math

import numpy as np
from django.test import SimpleTestCase

from roc.curves import (
    default_pf_grid,
    linear_pf_grid,
    roc_alpha0_closed_form,
    roc_asymptotic,
    roc_asymptotic_upper_bound,
    roc_n1_closed_form,
    roc_n1_expansion,
)
from roc.detector import p_detect, p_false_alarm, roc_exact, threshold_for_pfa
from roc.types import AsymptoticRegime, DetectorConfig, Provenance, RocPoint
from special_functions.exceptions import InvalidParameterError

PF_SAMPLE = (0.01, 0.05, 0.1, 0.3, 0.5, 0.9)


# ==================== TYPES ====================

class TypeTests(SimpleTestCase):

    def test_kappa(self):
        cfg = DetectorConfig.build(m=15, n=10, p=16, gamma=10)
        self.assertAlmostEqual(cfg.kappa, 10 / 16, places=15)
        self.assertEqual(cfg.null.eta, 0.0)
        self.assertEqual(cfg.spiked(3).eta, 3.0)

    def test_roc_point_validates(self):
        point = RocPoint(pf=0.2, pd=0.7, provenance='exact')
        self.assertEqual(point.provenance, Provenance.EXACT)
        with self.assertRaises(InvalidParameterError):
            RocPoint(pf=0.2, pd=1.5, provenance=Provenance.EXACT)

    def test_regime_validates(self):
        with self.assertRaises(InvalidParameterError):
            AsymptoticRegime(c=-1, n=2)
        with self.assertRaises(InvalidParameterError):
            AsymptoticRegime(c=1, n=0)


# ==================== DETECTOR ====================

class FalseAlarmTests(SimpleTestCase):

    def test_limits(self):
        cfg = DetectorConfig.build(m=6, n=3, p=8)
        self.assertEqual(p_false_alarm(0, cfg), 1.0)
        self.assertEqual(p_false_alarm(math.inf, cfg), 0.0)

    def test_closed_inverse_square_noise_record(self):
        cfg = DetectorConfig.build(m=6, n=3, p=6)
        u = 0.95 ** (1 / 18)
        lam = (u / (1 - u)) / cfg.kappa
        self.assertAlmostEqual(p_false_alarm(lam, cfg), 0.05, places=12)
        self.assertLess(abs(p_false_alarm(threshold_for_pfa(0.05, cfg), cfg) - 0.05), 1e-10)
        self.assertLess(abs(threshold_for_pfa(0.05, cfg) - lam) / lam, 1e-8)

    def test_median_threshold_two_by_one(self):
        cfg = DetectorConfig.build(m=2, n=1, p=2)
        u = math.sqrt(0.5)
        self.assertAlmostEqual(threshold_for_pfa(0.5, cfg), 2 * u / (1 - u), places=8)

    def test_round_trip(self):
        cfg = DetectorConfig.build(m=10, n=5, p=15)
        rng = np.random.default_rng(3)
        for alpha in rng.uniform(0.001, 0.999, 10):
            self.assertLess(abs(p_false_alarm(threshold_for_pfa(alpha, cfg), cfg) - alpha), 1e-10, alpha)

    def test_threshold_shrinks_as_pf_grows(self):
        cfg = DetectorConfig.build(m=4, n=2, p=5)
        thresholds = [threshold_for_pfa(pf, cfg) for pf in (0.1, 0.5, 0.9, 0.999)]
        self.assertTrue(all(a > b for a, b in zip(thresholds, thresholds[1:])))

    def test_rejects_bad_target(self):
        cfg = DetectorConfig.build(m=4, n=2, p=5)
        for target in (0.0, 1.0, -0.1):
            with self.assertRaises(InvalidParameterError):
                threshold_for_pfa(target, cfg)


class DetectionTests(SimpleTestCase):

    def test_zero_threshold(self):
        self.assertEqual(p_detect(10, 0, DetectorConfig.build(m=6, n=3, p=8)), 1.0)

    def test_rejects_zero_gamma(self):
        with self.assertRaises(InvalidParameterError):
            p_detect(0, 1.0, DetectorConfig.build(m=6, n=3, p=8))

    def test_vanishing_signal(self):
        cfg = DetectorConfig.build(m=6, n=3, p=8)
        for lam in (0.5, 1.0, 3.0):
            self.assertLess(abs(p_detect(1e-6, lam, cfg) - p_false_alarm(lam, cfg)), 1e-3)


class ExactRocTests(SimpleTestCase):

    def test_chance_line(self):
        (point,) = roc_exact(1e-6, DetectorConfig.build(m=6, n=3, p=8), [0.5])
        self.assertEqual(point.provenance, Provenance.EXACT)
        self.assertLess(abs(point.pd - 0.5), 1e-3)

    def test_matches_alpha0_closed_form(self):
        cfg = DetectorConfig.build(m=6, n=3, p=6)
        for point in roc_exact(10, cfg, PF_SAMPLE):
            self.assertLess(abs(point.pd - roc_alpha0_closed_form(10, 6, 3, point.pf)), 1e-9, point.pf)

    def test_consistency_chain_single_sample(self):
        cfg = DetectorConfig.build(m=4, n=1, p=4)
        for point in roc_exact(5, cfg, PF_SAMPLE):
            self.assertLess(abs(point.pd - roc_alpha0_closed_form(5, 4, 1, point.pf)), 1e-9)
            self.assertLess(abs(point.pd - roc_n1_closed_form(5, 4, point.pf)), 1e-9)

    def test_monotone_and_above_chance(self):
        cfg = DetectorConfig.build(m=10, n=5, p=15)
        points = roc_exact(10, cfg, PF_SAMPLE)
        pds = [p.pd for p in points]
        self.assertTrue(np.all(np.diff(pds) >= -1e-9))
        for point in points:
            self.assertGreaterEqual(point.pd, point.pf - 1e-6)

    def test_fewer_samples_degrade_profile(self):
        gamma = 100.0
        curves = [roc_exact(gamma, DetectorConfig.build(m=15, n=n, p=16), PF_SAMPLE) for n in (14, 10, 5)]
        for richer, poorer in zip(curves, curves[1:]):
            for a, b in zip(richer, poorer):
                self.assertLessEqual(b.pd, a.pd + 1e-9, a.pf)

    def test_parallel_matches_serial(self):
        cfg = DetectorConfig.build(m=6, n=3, p=8)
        serial = roc_exact(10, cfg, PF_SAMPLE)
        self.assertEqual(roc_exact(10, cfg, PF_SAMPLE, workers=4), serial)

    def test_rejects_closed_grid(self):
        with self.assertRaises(InvalidParameterError):
            roc_exact(10, DetectorConfig.build(m=6, n=3, p=8), [0.0, 0.5])


# ==================== CLOSED FORMS ====================

class ClosedFormTests(SimpleTestCase):

    def test_single_sample_example(self):
        expected = 1 - 0.9 / (11 - 10 * math.sqrt(0.9))
        self.assertAlmostEqual(roc_n1_closed_form(10, 2, 0.1), expected, places=14)
        self.assertAlmostEqual(roc_n1_closed_form(10, 2, 0.1), 0.4052, places=4)

    def test_no_signal_is_chance(self):
        for pf in (0.0, 0.2, 0.7, 1.0):
            self.assertAlmostEqual(roc_n1_closed_form(0, 5, pf), pf, places=15)
            self.assertEqual(roc_alpha0_closed_form(0, 5, 2, pf), pf)

    def test_endpoints(self):
        self.assertEqual(roc_alpha0_closed_form(10, 6, 3, 0.0), 0.0)
        self.assertEqual(roc_alpha0_closed_form(10, 6, 3, 1.0), 1.0)
        self.assertLess(roc_alpha0_closed_form(10, 6, 3, 1e-8), 1e-4)
        self.assertGreater(roc_alpha0_closed_form(10, 6, 3, 1 - 1e-8), 1 - 1e-6)

    def test_alpha0_reduces_to_single_sample(self):
        for m in (2, 4, 9):
            for pf in PF_SAMPLE:
                self.assertLess(abs(roc_alpha0_closed_form(10, m, 1, pf) - roc_n1_closed_form(10, m, pf)), 1e-10)

    def test_fixed_snr_power_collapse(self):
        gamma, pf = 10.0, 0.3
        slope = -(1 - pf) * math.log(1 - pf) * gamma
        gaps = [roc_n1_closed_form(gamma, m, pf) - pf for m in (10, 100, 1000, 10000)]
        self.assertTrue(all(a > b > 0 for a, b in zip(gaps, gaps[1:])))
        self.assertLess(abs(10000 * gaps[-1] - slope) / slope, 0.05)
        self.assertLess(abs(roc_n1_expansion(gamma, 10000, pf) - pf - slope / 10000), 1e-15)

    def test_fixed_snr_power_decays_with_dimension(self):
        pds = [roc_alpha0_closed_form(10, m, 2, 0.3) for m in (4, 8, 16, 32)]
        self.assertTrue(all(a >= b - 1e-12 for a, b in zip(pds, pds[1:])))

    def test_rejects_bad_dimensions(self):
        with self.assertRaises(InvalidParameterError):
            roc_alpha0_closed_form(10, 3, 3, 0.5)
        with self.assertRaises(InvalidParameterError):
            roc_n1_closed_form(10, 1, 0.5)


class AsymptoticTests(SimpleTestCase):

    def test_zero_c_is_chance(self):
        for n in (1, 3, 10):
            for pf in np.linspace(0, 1, 11):
                self.assertAlmostEqual(roc_asymptotic(AsymptoticRegime(0, n), pf), pf, places=14)

    def test_known_value(self):
        self.assertAlmostEqual(roc_asymptotic(AsymptoticRegime(1, 1), 0.5), 1 - 0.5 / (1 + math.log(2)), places=14)
        self.assertAlmostEqual(roc_asymptotic_upper_bound(1, 0.5), 0.75, places=15)

    def test_bound_dominates(self):
        for c in (0, 0.5, 1, 5):
            self.assertAlmostEqual(roc_asymptotic_upper_bound(c, 0.3), 1 - 0.7 ** (c + 1), places=14)
            for n in range(1, 11):
                for pf in np.linspace(0, 1, 21):
                    bound = roc_asymptotic_upper_bound(c, pf)
                    self.assertLessEqual(roc_asymptotic(AsymptoticRegime(c, n), pf), bound + 1e-15)

    def test_pf_one(self):
        self.assertEqual(roc_asymptotic(AsymptoticRegime(2, 3), 1.0), 1.0)

    def test_large_system_near_limit(self):
        self.assertLess(abs(roc_n1_closed_form(500, 500, 0.5) - roc_asymptotic(AsymptoticRegime(1, 1), 0.5)), 5e-3)

    def test_finite_profiles_converge(self):
        grid = linear_pf_grid(0.05, 0.95, 19)
        regime = AsymptoticRegime(1, 5)
        gaps = [
            max(abs(roc_alpha0_closed_form(m, m, 5, pf) - roc_asymptotic(regime, pf)) for pf in grid)
            for m in (6, 20, 60)
        ]
        self.assertTrue(gaps[0] > gaps[1] > gaps[2])
        self.assertLessEqual(gaps[2], 2e-2)


class GridTests(SimpleTestCase):

    def test_default_grid(self):
        grid = default_pf_grid()
        self.assertEqual(len(grid), 101)
        self.assertAlmostEqual(grid[0], 1e-4)
        self.assertAlmostEqual(grid[-1], 1 - 1e-4)
        self.assertTrue(np.all(np.diff(grid) > 0))

    def test_linear_grid(self):
        np.testing.assert_allclose(linear_pf_grid(0, 1, 5), [0, 0.25, 0.5, 0.75, 1])
        with self.assertRaises(InvalidParameterError):
            linear_pf_grid(0.5, 0.2, 3)
