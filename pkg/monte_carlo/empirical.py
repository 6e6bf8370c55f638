"""
Empirical c.d.f.s, empirical ROC curves and KS statistics

WHAT THIS FILE DOES:
- empirical_cdf: runs the sampler in fixed chunks of trials over a thread pool
  and merges the chunks in trial order
- empirical_roc: H0 quantiles as thresholds, H1 exceedance fractions as pd
- ks_distance / ks_critical_value: one-sample Kolmogorov-Smirnov statistic
  against an analytic c.d.f. and its asymptotic critical value

Chunk boundaries depend only on the trial count and chunk size, never on the
number of threads, so the merged sample is the same for any --threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from cdf_exact.config import SpikedFConfig
from roc.types import Provenance, RocPoint
from special_functions.exceptions import InvalidParameterError

from .sampling import sample_lambda_max_batch
from .streams import Hypothesis, RngStream

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 1024


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    samples: np.ndarray

    def __post_init__(self):
        samples = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if samples.size == 0:
            raise InvalidParameterError('an empirical c.d.f. needs at least one sample')
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def __call__(self, x):
        """Fraction of samples <= x (right-continuous)."""
        values = np.searchsorted(self.samples, x, side='right') / self.count
        return float(values) if np.ndim(values) == 0 else values

    def exceedance(self, threshold):
        return 1.0 - self(threshold)

    def quantile(self, q):
        return np.quantile(self.samples, q)


def _chunks(trials: int, chunk_size: int):
    return [(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def empirical_cdf(cfg: SpikedFConfig, hypothesis, trials: int, rng: RngStream, threads: int = 1,
                  chunk_size: int = DEFAULT_CHUNK_SIZE, direction=None, scale=1.0) -> EmpiricalCdf:
    if trials < 1:
        raise InvalidParameterError(f'trials must be positive, got {trials}')
    if chunk_size < 1:
        raise InvalidParameterError(f'chunk size must be positive, got {chunk_size}')
    chunks = _chunks(trials, chunk_size)
    logger.debug('%s: %d trials in %d chunks on %d threads', hypothesis, trials, len(chunks), threads)

    def run(bounds):
        return sample_lambda_max_batch(cfg, hypothesis, rng, *bounds, direction=direction, scale=scale)

    if threads <= 1:
        parts = [run(bounds) for bounds in chunks]
    else:
        # map keeps submission order
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    return EmpiricalCdf(np.concatenate(parts))


def empirical_roc(cfg: SpikedFConfig, gamma, trials: int, pf_grid, rng: RngStream, threads: int = 1,
                  chunk_size: int = DEFAULT_CHUNK_SIZE):
    null = empirical_cdf(cfg.with_eta(0.0), Hypothesis.H0, trials, rng, threads, chunk_size)
    alt = empirical_cdf(cfg.with_eta(gamma), Hypothesis.H1, trials, rng, threads, chunk_size)
    points = []
    for pf in pf_grid:
        threshold = null.quantile(1.0 - float(pf))
        points.append(RocPoint(pf=pf, pd=alt.exceedance(threshold), provenance=Provenance.EMPIRICAL))
    return points


# ==================== KOLMOGOROV-SMIRNOV ====================

def ks_distance(e: EmpiricalCdf, analytic) -> float:
    """Two-sided KS statistic of the samples against `analytic` (a scalar c.d.f.)."""
    result = stats.kstest(e.samples, np.vectorize(lambda x: float(analytic(x)), otypes=[float]))
    return float(result.statistic)


def ks_critical_value(count: int, level: float = 0.01) -> float:
    """Asymptotic critical value, about 1.63 / sqrt(count) at level 0.01."""
    if count < 1 or not 0.0 < level < 1.0:
        raise InvalidParameterError(f'bad KS parameters: count={count}, level={level}')
    return float(stats.kstwobign.isf(level)) / math.sqrt(count)
