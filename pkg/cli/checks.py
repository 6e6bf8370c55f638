"""
Acceptance checks run by `manage.py validate`

WHAT THIS FILE DOES:
- Every check compares a computed quantity with an oracle and reports
  (value, limit); a check passes when value <= limit
- Suite carries the run settings (seed, threads, trial count) and the
  --corrupt test hook, which inflates every oracle value by CORRUPTION so
  the failure path can be exercised
- CHECKS maps the names accepted by --check to the check functions

QUICK MODE:
Fewer configurations and the small trial count of settings.SPIKEDF
['VALIDATE_TRIALS']['quick']; the two-sample quadrature is skipped.
"""

import logging
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from cdf_exact.config import SpikedFConfig
from cdf_exact.densities import joint_density_null, joint_density_spiked
from cdf_exact.distributions import cdf_alpha0_spiked, cdf_max_null, cdf_max_spiked
from monte_carlo.empirical import empirical_cdf, empirical_roc, ks_critical_value, ks_distance
from monte_carlo.streams import Hypothesis, RngStream
from roc.curves import (
    linear_pf_grid,
    roc_alpha0_closed_form,
    roc_asymptotic,
    roc_asymptotic_upper_bound,
    roc_n1_closed_form,
)
from roc.detector import roc_exact
from roc.types import AsymptoticRegime, DetectorConfig
from special_functions.exceptions import SpikedFError
from special_functions.functions import gauss_2f1_terminating, jacobi_p, pochhammer

logger = logging.getLogger(__name__)

CORRUPTION = 0.05
KS_LEVEL = 0.01
ROC_PF = (0.01, 0.05, 0.1, 0.3, 0.5, 0.9)
EMPIRICAL_ROC_PF = (0.05, 0.1, 0.3, 0.5, 0.7, 0.9)


def db(value):
    return 10.0 ** (value / 10.0)


# (m, n, p) and (m, n, p, eta); the first entries form the quick subset
NULL_KS_CONFIGS = [(10, 3, 15), (8, 5, 8), (10, 7, 15), (8, 5, 10)]
SPIKED_KS_CONFIGS = [
    (10, 5, 15, db(10)), (8, 5, 8, db(10)),
    (10, 7, 15, db(0)), (10, 7, 15, db(10)), (10, 7, 15, db(20)),
]
QUICK_KS_CONFIGS = 2


@dataclass(frozen=True)
class CheckResult:
    check: str
    passed: bool
    value: float
    limit: float
    detail: str = ''


@dataclass(frozen=True)
class Suite:
    seed: int
    threads: int = 1
    trials: int = 2000
    chunk_size: int = 1024
    quick: bool = False
    corrupt: bool = False

    def reference(self, value):
        """Oracle values pass through here, so --corrupt reaches every check."""
        return value * (1.0 + CORRUPTION) if self.corrupt else value

    def result(self, check, value, limit, detail='') -> CheckResult:
        value = float(value)
        return CheckResult(check, bool(value <= limit), value, float(limit), detail)

    def ks_configs(self, configs):
        return configs[:QUICK_KS_CONFIGS] if self.quick else configs


def rel_gap(value, reference) -> float:
    return abs(float(value) - float(reference)) / max(abs(float(reference)), 1e-300)


# ==================== SPECIAL FUNCTIONS ====================

def jacobi_recurrence(n, a, b, x):
    """Three-term recurrence in extended precision (call inside mpmath.workdps)."""
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


def check_special_functions(suite: Suite):
    degrees = (1, 5, 12, 20, 30)
    with mpmath.workdps(50):
        jacobi = max(
            rel_gap(jacobi_p(n, a, b, x), suite.reference(float(jacobi_recurrence(n, a, b, x))))
            for n in degrees
            for a, b in ((0, 1), (2, 5), (4, 9))
            for x in (-0.9, -0.3, 0.4, 1.0, 1.5, 3.0, 19.0)
        )
        series = max(
            rel_gap(gauss_2f1_terminating(-order, b, c, z).to_float(),
                    suite.reference(float(mpmath.hyp2f1(-order, b, c, z))))
            for order in (2, 7, 15)
            for b, c, z in ((1.0, 3.0, -0.9), (2.5, 1.5, -0.4), (-1.5, 6.0, -0.3), (0.5, 2.0, 0.1))
        )
    nonzero = sum(
        1 for n in range(0, 15) for k in range(n + 1, n + 6) if not pochhammer(-n, k).is_zero
    )
    return [
        suite.result('jacobi_recurrence', jacobi, 1e-12,
                     'max relative error, degree <= 30, inside and outside [-1, 1]'),
        suite.result('hypergeometric_direct_sum', series, 1e-11, 'max relative error'),
        suite.result('pochhammer_negative_integer', nonzero, 0, 'nonzero (-n)_k with k > n'),
    ]


# ==================== KOLMOGOROV-SMIRNOV ====================

def _ks_result(suite: Suite, name, cfg, hypothesis, analytic, stream_id):
    samples = empirical_cdf(cfg, hypothesis, suite.trials, RngStream(suite.seed, stream_id),
                            suite.threads, suite.chunk_size)
    distance = ks_distance(samples, lambda x: suite.reference(analytic(cfg.kappa * x, cfg)))
    label = f'm={cfg.m} n={cfg.n} p={cfg.p} eta={cfg.eta:g}'
    return suite.result(name, distance, ks_critical_value(samples.count, KS_LEVEL),
                        f'{label}, {samples.count} trials')


def check_null_ks(suite: Suite):
    return [
        _ks_result(suite, 'null_ks', SpikedFConfig(m=m, n=n, p=p), Hypothesis.H0, cdf_max_null, stream)
        for stream, (m, n, p) in enumerate(suite.ks_configs(NULL_KS_CONFIGS))
    ]


def check_spiked_ks(suite: Suite):
    return [
        _ks_result(suite, 'spiked_ks', SpikedFConfig(m=m, n=n, p=p, eta=eta), Hypothesis.H1,
                   cdf_max_spiked, 100 + stream)
        for stream, (m, n, p, eta) in enumerate(suite.ks_configs(SPIKED_KS_CONFIGS))
    ]


# ==================== CLOSED FORMS ====================

def alpha0_hypergeometric(x, m, n, eta):
    """The p = m c.d.f. with mpmath's own 2F1 (call inside mpmath.workdps)."""
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


def check_alpha0_chain(suite: Suite):
    results = []
    grid = np.geomspace(0.1, 40.0, 50)
    for eta in (0.5, 10.0, 100.0):
        chain = oracle = 0.0
        for m, n in ((4, 2), (8, 5), (12, 7)):
            cfg = SpikedFConfig(m=m, n=n, p=m, eta=eta)
            for x in grid:
                closed = cdf_alpha0_spiked(x, m, n, eta)
                chain = max(chain, rel_gap(cdf_max_spiked(x, cfg), suite.reference(closed)))
                with mpmath.workdps(150):
                    reference = float(alpha0_hypergeometric(x, m, n, eta))
                oracle = max(oracle, rel_gap(closed, suite.reference(reference)))
        results.append(suite.result('alpha0_chain', chain, 1e-9, f'eta={eta:g}, max relative gap'))
        results.append(suite.result('alpha0_hypergeometric', oracle, 1e-9, f'eta={eta:g}, vs mpmath hyp2f1'))
    return results


def _ordered_pair_integral(density, cfg, margin=1e-6):
    def integrand(y2, y1):
        l1, l2 = y1 / (1 - y1), y2 / (1 - y2)
        return density([l1, l2], cfg) / ((1 - y1) ** 2 * (1 - y2) ** 2)

    value, _ = integrate.dblquad(integrand, 0, 1 - 2 * margin, lambda y1: y1 + margin, lambda y1: 1.0,
                                 epsabs=1e-10, epsrel=1e-9)
    return value


def check_density_quadrature(suite: Suite):
    gap = 0.0
    for cfg in (SpikedFConfig(m=4, n=1, p=5, eta=3), SpikedFConfig(m=6, n=1, p=6, eta=3)):
        for x in (0.5, 1.0, 2.0, 5.0):
            integral, _ = integrate.quad(
                lambda lam: joint_density_spiked([lam], cfg), 0, x, epsabs=1e-14, epsrel=1e-12,
            )
            gap = max(gap, abs(cdf_max_spiked(x, cfg) - suite.reference(integral)))
    results = [suite.result('density_cdf_n1', gap, 1e-8, 'integral of the density vs c.d.f.')]
    if not suite.quick:
        total = max(
            abs(suite.reference(_ordered_pair_integral(density, cfg)) - 1.0)
            for density, cfg in ((joint_density_null, SpikedFConfig(m=4, n=2, p=5)),
                                 (joint_density_spiked, SpikedFConfig(m=4, n=2, p=5, eta=2)))
        )
        results.append(suite.result('density_n2_normalization', total, 1e-6, 'ordered region'))
    return results


# ==================== ROC ====================

def check_roc_consistency(suite: Suite):
    gap = 0.0
    for m, n, gamma in ((4, 1, 5.0), (6, 3, 10.0)):
        for point in roc_exact(gamma, DetectorConfig.build(m=m, n=n, p=m), ROC_PF, workers=suite.threads):
            gap = max(gap, abs(point.pd - suite.reference(roc_alpha0_closed_form(gamma, m, n, point.pf))))
            if n == 1:
                gap = max(gap, abs(point.pd - suite.reference(roc_n1_closed_form(gamma, m, point.pf))))
    results = [suite.result('roc_closed_forms', gap, 1e-9, 'exact vs p = m and n = 1 closed forms')]

    cfg = DetectorConfig.build(m=15, n=10, p=16)
    gamma = db(10)
    exact = roc_exact(gamma, cfg, EMPIRICAL_ROC_PF, workers=suite.threads)
    empirical = empirical_roc(cfg.base, gamma, suite.trials, EMPIRICAL_ROC_PF, RngStream(suite.seed, 200),
                              suite.threads, suite.chunk_size)
    worst = max(abs(e.pd - suite.reference(x.pd)) for e, x in zip(empirical, exact))
    limit = max(1e-2, 4.0 * math.sqrt(0.5 / suite.trials))
    results.append(suite.result('roc_empirical', worst, limit, f'm=15 n=10 p=16, {suite.trials} trials'))
    return results


def check_degradation(suite: Suite):
    gamma = db(20)
    curves = [roc_exact(gamma, DetectorConfig.build(m=15, n=n, p=16), ROC_PF, workers=suite.threads)
              for n in (14, 10, 5)]
    violation = max(
        suite.reference(poor.pd) - rich.pd
        for richer, poorer in zip(curves, curves[1:])
        for rich, poor in zip(richer, poorer)
    )
    return [suite.result('degradation', max(violation, 0.0), 1e-9, 'pd must not grow as n shrinks')]


def check_asymptotic(suite: Suite):
    grid = linear_pf_grid(0.05, 0.95, 19)
    regime = AsymptoticRegime(1, 5)
    gaps = [
        max(abs(roc_alpha0_closed_form(m, m, 5, pf) - suite.reference(roc_asymptotic(regime, pf))) for pf in grid)
        for m in (6, 20, 60)
    ]
    not_decreasing = sum(1 for a, b in zip(gaps, gaps[1:]) if not a > b)
    overshoot = max(
        suite.reference(roc_asymptotic(AsymptoticRegime(c, n), pf)) - roc_asymptotic_upper_bound(c, pf)
        for c in (0, 0.5, 1, 5)
        for n in range(1, 11)
        for pf in np.linspace(0, 1, 21)
    )
    return [
        suite.result('asymptotic_gap_order', not_decreasing, 0, 'gap strictly decreasing in m = 6, 20, 60'),
        suite.result('asymptotic_gap_m60', gaps[-1], 2e-2, 'max gap at m = 60'),
        suite.result('asymptotic_upper_bound', max(overshoot, 0.0), 1e-15, 'limit minus bound'),
    ]


def check_power_collapse(suite: Suite):
    gamma, pf = 10.0, 0.3
    slope = -(1 - pf) * math.log(1 - pf) * gamma
    gaps = [roc_n1_closed_form(gamma, m, pf) - pf for m in (10, 100, 1000, 10000)]
    not_shrinking = sum(1 for a, b in zip(gaps, gaps[1:]) if not a > b > 0)
    rel = abs(10000 * gaps[-1] - suite.reference(slope)) / slope
    return [
        suite.result('power_collapse_order', not_shrinking, 0, 'pd - pf decreasing to 0'),
        suite.result('power_collapse_rate', rel, 0.05, 'm (pd - pf) vs first-order slope at m = 1e4'),
    ]


def check_determinism(suite: Suite):
    cfg = SpikedFConfig(m=6, n=3, p=8, eta=db(10))
    trials = min(suite.trials, 4096)
    rng = RngStream(suite.seed, 300)
    serial = empirical_cdf(cfg, Hypothesis.H1, trials, rng, 1, suite.chunk_size).samples
    parallel = empirical_cdf(cfg, Hypothesis.H1, trials, rng, 8, suite.chunk_size).samples
    detector = DetectorConfig.build(m=6, n=3, p=8)
    roc_serial = roc_exact(cfg.eta, detector, ROC_PF, workers=1)
    roc_parallel = roc_exact(cfg.eta, detector, ROC_PF, workers=8)
    differing = int(np.count_nonzero(serial != parallel)) + sum(a != b for a, b in zip(roc_serial, roc_parallel))
    return [suite.result('determinism', differing, 0, 'outputs differing between 1 and 8 threads')]


CHECKS = {
    'special_functions': check_special_functions,
    'null_ks': check_null_ks,
    'spiked_ks': check_spiked_ks,
    'alpha0_chain': check_alpha0_chain,
    'density_quadrature': check_density_quadrature,
    'roc_consistency': check_roc_consistency,
    'degradation': check_degradation,
    'asymptotic': check_asymptotic,
    'power_collapse': check_power_collapse,
    'determinism': check_determinism,
}


def run_checks(suite: Suite, names=None):
    """Runs the named checks (all by default) in CHECKS order."""
    results = []
    for name, check in CHECKS.items():
        if names and name not in names:
            continue
        logger.info('validate: running %s', name)
        try:
            results.extend(check(suite))
        except SpikedFError as exc:
            logger.warning('validate: %s raised %s', name, exc)
            results.append(CheckResult(name, False, 1.0, 0.0, f'raised: {exc}'))
    return results
