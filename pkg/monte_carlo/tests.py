import math

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from cdf_exact.config import SpikedFConfig
from cdf_exact.distributions import cdf_max_null, cdf_max_spiked
from monte_carlo.empirical import (
    EmpiricalCdf,
    empirical_cdf,
    empirical_roc,
    ks_critical_value,
    ks_distance,
)
from monte_carlo.sampling import (
    random_direction,
    sample_covariances,
    sample_lambda_max,
    sample_lambda_max_batch,
    spike_direction,
)
from monte_carlo.streams import Hypothesis, RngStream
from roc.curves import roc_n1_closed_form
from roc.types import Provenance
from special_functions.exceptions import InvalidParameterError

SEED = 20240611


# ==================== STREAMS ====================

class RngStreamTests(SimpleTestCase):

    def test_same_key_same_draws(self):
        a = RngStream(SEED, 3).trial_generator(Hypothesis.H0, 17).standard_normal(5)
        b = RngStream(SEED, 3).trial_generator('H0', 17).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_keys_separate_streams(self):
        base = RngStream(SEED, 0)
        draws = [
            base.trial_generator(Hypothesis.H0, 0).standard_normal(3),
            base.trial_generator(Hypothesis.H1, 0).standard_normal(3),
            base.trial_generator(Hypothesis.H0, 1).standard_normal(3),
            RngStream(SEED, 1).trial_generator(Hypothesis.H0, 0).standard_normal(3),
        ]
        for i in range(len(draws)):
            for j in range(i + 1, len(draws)):
                self.assertFalse(np.array_equal(draws[i], draws[j]))

    def test_rejects_bad_seed(self):
        with self.assertRaises(InvalidParameterError):
            RngStream(-1)
        with self.assertRaises(InvalidParameterError):
            RngStream(2 ** 64)


# ==================== SAMPLING ====================

class SamplingTests(SimpleTestCase):

    def test_covariance_shapes(self):
        cfg = SpikedFConfig(m=5, n=2, p=7, eta=3)
        signal, noise = sample_covariances(cfg, Hypothesis.H1, np.random.default_rng(0))
        self.assertEqual(signal.shape, (5, 5))
        self.assertEqual(np.linalg.matrix_rank(signal), 2)
        np.testing.assert_allclose(noise, noise.conj().T)

    def test_spike_update_covariance(self):
        # E[x x^H] = I + eta s s^H for the square-root update
        cfg = SpikedFConfig(m=3, n=2, p=3, eta=8)
        gen = np.random.default_rng(1)
        total = np.zeros((3, 3), dtype=complex)
        for _ in range(3000):
            signal, _ = sample_covariances(cfg, Hypothesis.H1, gen)
            total += signal
        mean = total / 3000
        np.testing.assert_allclose(mean, np.diag([9.0, 1.0, 1.0]), atol=0.5)

    def test_positive_and_reproducible(self):
        cfg = SpikedFConfig(m=6, n=3, p=8, eta=10)
        rng = RngStream(SEED)
        first = sample_lambda_max(cfg, Hypothesis.H1, rng, trial=4)
        self.assertGreater(first, 0)
        self.assertEqual(first, sample_lambda_max(cfg, Hypothesis.H1, rng, trial=4))

    def test_batch_matches_single(self):
        cfg = SpikedFConfig(m=6, n=3, p=8, eta=10)
        rng = RngStream(SEED)
        batch = sample_lambda_max_batch(cfg, Hypothesis.H1, rng, 5, 12)
        single = [sample_lambda_max(cfg, Hypothesis.H1, rng, t) for t in range(5, 12)]
        np.testing.assert_allclose(batch, single, rtol=1e-10)
        self.assertEqual(sample_lambda_max_batch(cfg, Hypothesis.H1, rng, 3, 3).size, 0)

    def test_scale_invariance(self):
        cfg = SpikedFConfig(m=6, n=3, p=8, eta=10)
        rng = RngStream(SEED)
        for trial in range(5):
            base = sample_lambda_max(cfg, Hypothesis.H1, rng, trial)
            scaled = sample_lambda_max(cfg, Hypothesis.H1, rng, trial, scale=7.5)
            self.assertLess(abs(scaled - base) / base, 1e-10)

    def test_spike_direction(self):
        np.testing.assert_array_equal(spike_direction(3), [1, 0, 0])
        self.assertAlmostEqual(np.linalg.norm(spike_direction(2, [3, 4j])), 1.0, places=15)
        self.assertAlmostEqual(np.linalg.norm(random_direction(5, RngStream(SEED))), 1.0, places=14)
        with self.assertRaises(InvalidParameterError):
            spike_direction(3, [0, 0, 0])

    def test_spike_raises_mean(self):
        cfg = SpikedFConfig(m=6, n=3, p=8, eta=10)
        rng = RngStream(SEED)
        null = empirical_cdf(cfg, Hypothesis.H0, 2000, rng).samples
        alt = empirical_cdf(cfg, Hypothesis.H1, 2000, rng).samples
        self.assertGreater(alt.mean(), null.mean())


# ==================== EMPIRICAL ====================

class EmpiricalCdfTests(SimpleTestCase):

    def test_step_function(self):
        e = EmpiricalCdf([3.0, 1.0, 2.0, 2.0])
        self.assertEqual(e.count, 4)
        self.assertEqual(e(0.5), 0.0)
        self.assertEqual(e(1.0), 0.25)
        self.assertEqual(e(2.0), 0.75)
        self.assertEqual(e(10.0), 1.0)
        self.assertEqual(e.exceedance(2.0), 0.25)
        np.testing.assert_array_equal(e(np.array([1.5, 3.0])), [0.25, 1.0])

    def test_single_sample(self):
        e = empirical_cdf(SpikedFConfig(m=3, n=1, p=3), Hypothesis.H0, 1, RngStream(SEED))
        self.assertEqual(e.count, 1)
        self.assertEqual(e(e.samples[0]), 1.0)

    def test_quantile(self):
        e = EmpiricalCdf(np.arange(1, 101, dtype=float))
        self.assertAlmostEqual(e.quantile(0.5), 50.5)

    def test_rejects_empty(self):
        with self.assertRaises(InvalidParameterError):
            EmpiricalCdf([])

    def test_thread_count_does_not_change_samples(self):
        cfg = SpikedFConfig(m=5, n=2, p=6, eta=4)
        one = empirical_cdf(cfg, Hypothesis.H1, 2500, RngStream(SEED), threads=1, chunk_size=256)
        many = empirical_cdf(cfg, Hypothesis.H1, 2500, RngStream(SEED), threads=4, chunk_size=256)
        np.testing.assert_array_equal(one.samples, many.samples)

    def test_larger_spike_dominates(self):
        cfg = SpikedFConfig(m=10, n=7, p=15)
        curves = [empirical_cdf(cfg.with_eta(10 ** (db / 10)), Hypothesis.H1, 3000, RngStream(SEED))
                  for db in (0, 10, 20)]
        for x in np.linspace(0.5, 20, 20):
            self.assertGreaterEqual(curves[0](x) + 0.03, curves[1](x))
            self.assertGreaterEqual(curves[1](x) + 0.03, curves[2](x))


class OracleAgreementTests(SimpleTestCase):

    def test_null_square_noise_record(self):
        cfg = SpikedFConfig(m=3, n=1, p=3)
        e = empirical_cdf(cfg, Hypothesis.H0, 4000, RngStream(SEED))

        def analytic(x):
            y = cfg.kappa * x / (1 + cfg.kappa * x)
            return y ** (cfg.m * cfg.n)

        self.assertLess(ks_distance(e, analytic), ks_critical_value(e.count, 0.001))

    def test_null_with_excess_noise_samples(self):
        cfg = SpikedFConfig(m=5, n=2, p=7)
        e = empirical_cdf(cfg, Hypothesis.H0, 3000, RngStream(SEED, 1))
        distance = ks_distance(e, lambda x: cdf_max_null(cfg.kappa * x, cfg))
        self.assertLess(distance, ks_critical_value(e.count, 0.001))

    def test_spiked(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=2)
        e = empirical_cdf(cfg, Hypothesis.H1, 3000, RngStream(SEED, 2))
        distance = ks_distance(e, lambda x: cdf_max_spiked(cfg.kappa * x, cfg))
        self.assertLess(distance, ks_critical_value(e.count, 0.001))

    def test_rotation_invariance(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=5)
        rng = RngStream(SEED, 3)
        aligned = empirical_cdf(cfg, Hypothesis.H1, 3000, rng)
        rotated = empirical_cdf(cfg, Hypothesis.H1, 3000, RngStream(SEED, 4), direction=random_direction(4, rng))
        self.assertGreater(stats.ks_2samp(aligned.samples, rotated.samples).pvalue, 0.001)


class EmpiricalRocTests(SimpleTestCase):

    def test_no_signal_is_chance(self):
        cfg = SpikedFConfig(m=4, n=2, p=5)
        trials = 4000
        for point in empirical_roc(cfg, 0.0, trials, [0.1, 0.3, 0.5, 0.9], RngStream(SEED)):
            self.assertEqual(point.provenance, Provenance.EMPIRICAL)
            sigma = math.sqrt(2 * point.pf * (1 - point.pf) / trials)
            self.assertLess(abs(point.pd - point.pf), 4 * sigma + 1 / trials)

    def test_single_sample_closed_form(self):
        cfg = SpikedFConfig(m=2, n=1, p=2)
        for point in empirical_roc(cfg, 10.0, 10000, [0.1, 0.3, 0.6], RngStream(SEED, 5)):
            self.assertLess(abs(point.pd - roc_n1_closed_form(10.0, 2, point.pf)), 0.04)


class KolmogorovSmirnovTests(SimpleTestCase):

    def test_critical_value(self):
        self.assertAlmostEqual(ks_critical_value(10 ** 4, 0.01), 0.0163, places=4)
        with self.assertRaises(InvalidParameterError):
            ks_critical_value(0)

    def test_uniform_samples(self):
        e = EmpiricalCdf(np.random.default_rng(9).uniform(size=10 ** 4))
        self.assertLess(ks_distance(e, lambda x: min(max(x, 0.0), 1.0)), ks_critical_value(e.count, 0.001))

    def test_self_distance_is_one_step(self):
        # the left-limit term of a continuous-c.d.f. statistic sees one jump
        e = EmpiricalCdf(np.random.default_rng(10).uniform(size=50))
        self.assertAlmostEqual(ks_distance(e, e), 1 / 50, places=14)

    def test_wrong_law_is_rejected(self):
        cfg = SpikedFConfig(m=4, n=2, p=5, eta=20)
        e = empirical_cdf(cfg, Hypothesis.H1, 2000, RngStream(SEED, 6))
        distance = ks_distance(e, lambda x: cdf_max_null(cfg.kappa * x, cfg))
        self.assertGreater(distance, ks_critical_value(e.count, 0.01))
