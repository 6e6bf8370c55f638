"""
Largest-eigenvalue sampler for the detection model

WHAT THIS FILE DOES:
- Draws p noise-only vectors and n observation vectors, all standard complex
  Gaussian (variance 1/2 per real and imaginary part)
- Under H1 the observations get the rank-one square-root update
      x = z + (sqrt(1 + eta) - 1) (s^H z) s
  which gives covariance I + eta s s^H
- Forms Sigma_n = N^T conj(N) / p and Sigma_s = X^T conj(X) / n (rows are
  vectors) and returns the largest root of det(Sigma_s - lambda Sigma_n) = 0

The result is on the scale of the whitened sample covariance; the analytic
c.d.f. applies to kappa * lambda with kappa = n / p.
"""

import logging
import math

import numpy as np

from cdf_exact.config import SpikedFConfig
from linalg_core.decompositions import max_generalized_eig
from special_functions.exceptions import InvalidParameterError, NotPositiveDefiniteError

from .streams import Hypothesis, RngStream

logger = logging.getLogger(__name__)


def complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / math.sqrt(2.0)


def spike_direction(m: int, direction=None) -> np.ndarray:
    """Unit spike vector; the first basis vector unless one is given."""
    if direction is None:
        s = np.zeros(m, dtype=complex)
        s[0] = 1.0
        return s
    s = np.asarray(direction, dtype=complex).ravel()
    norm = np.linalg.norm(s)
    if s.size != m or not norm > 0:
        raise InvalidParameterError(f'spike direction must be a nonzero vector of length {m}')
    return s / norm


def random_direction(m: int, rng: RngStream) -> np.ndarray:
    return spike_direction(m, complex_gaussian(rng.run_generator(), m))


def sample_covariances(cfg: SpikedFConfig, hypothesis, gen: np.random.Generator, direction=None, scale=1.0):
    """(Sigma_s, Sigma_n) for one trial."""
    m, n, p = cfg.m, cfg.n, cfg.p
    noise = scale * complex_gaussian(gen, (p, m))
    obs = complex_gaussian(gen, (n, m))
    if Hypothesis(hypothesis) is Hypothesis.H1 and cfg.eta > 0:
        s = spike_direction(m, direction)
        obs = obs + (math.sqrt(1.0 + cfg.eta) - 1.0) * np.outer(obs @ s.conj(), s)
    obs = scale * obs
    return obs.T @ obs.conj() / n, noise.T @ noise.conj() / p


def sample_lambda_max(cfg: SpikedFConfig, hypothesis, rng: RngStream, trial: int = 0,
                      direction=None, scale=1.0) -> float:
    gen = rng.trial_generator(hypothesis, trial)
    try:
        return max_generalized_eig(*sample_covariances(cfg, hypothesis, gen, direction, scale))
    except NotPositiveDefiniteError:
        # the generator has moved on, so the second draw is fresh but still reproducible
        logger.warning('trial %d: singular noise covariance, drawing once more', trial)
        return max_generalized_eig(*sample_covariances(cfg, hypothesis, gen, direction, scale))


def sample_lambda_max_batch(cfg: SpikedFConfig, hypothesis, rng: RngStream, start: int, stop: int,
                            direction=None, scale=1.0) -> np.ndarray:
    """Trials start..stop-1 in one stacked LAPACK call; same draws as sample_lambda_max."""
    if not 0 <= start <= stop:
        raise InvalidParameterError(f'bad trial range {start}..{stop}')
    if start == stop:
        return np.empty(0)
    pairs = [
        sample_covariances(cfg, hypothesis, rng.trial_generator(hypothesis, t), direction, scale)
        for t in range(start, stop)
    ]
    signal = np.stack([s for s, _ in pairs])
    noise = np.stack([nz for _, nz in pairs])
    try:
        return np.atleast_1d(max_generalized_eig(signal, noise))
    except NotPositiveDefiniteError:
        return np.array([
            sample_lambda_max(cfg, hypothesis, rng, t, direction, scale) for t in range(start, stop)
        ])
