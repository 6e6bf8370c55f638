"""
Joint density of the ordered non-zero eigenvalues

WHAT THIS FILE DOES:
- joint_density_null:   K * prod lambda^(m-n) (1+lambda)^-(p+n) * Vandermonde^2
- joint_density_spiked: the same shape times g(y_1, ..., y_n) / (1+eta)^n,
                        where g is a divided difference over y = lambda/(1+lambda)

Used as a quadrature oracle for the c.d.f. at small n.
"""

import logging
import math

import numpy as np

from special_functions.exceptions import InvalidParameterError, NumericalInstabilityError
from special_functions.logscaled import LogScaled, cancellation_digits, log_factorial, log_sum

from .config import SpikedFConfig
from .distributions import TRUSTED_DIGITS, weak_spike_applies, weak_spike_band
from .normalizers import log_k_density_null, log_k_density_spiked
from .precise import density_g_precise

logger = logging.getLogger(__name__)

MIN_GAP = 1e-8


def _check_lambdas(lambdas, cfg: SpikedFConfig) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float).ravel()
    if lambdas.size != cfg.n:
        raise InvalidParameterError(f'expected {cfg.n} eigenvalues, got {lambdas.size}')
    if not np.all(np.isfinite(lambdas)) or np.any(lambdas <= 0):
        raise InvalidParameterError('eigenvalues must be finite and positive')
    if np.any(np.diff(lambdas) <= 0):
        raise InvalidParameterError('eigenvalues must be strictly ascending')
    y = lambdas / (1.0 + lambdas)
    if y.size > 1 and np.min(np.diff(y)) < MIN_GAP:
        raise InvalidParameterError(f'eigenvalues closer than {MIN_GAP:g} in y = lambda/(1+lambda)')
    return lambdas


def _log_shape(lambdas: np.ndarray, cfg: SpikedFConfig) -> float:
    """log of prod lambda^beta (1+lambda)^-(p+n) * prod_{i<j} (lambda_j - lambda_i)^2."""
    total = math.fsum(cfg.beta * np.log(lambdas) - (cfg.p + cfg.n) * np.log1p(lambdas))
    for i in range(lambdas.size):
        for j in range(i + 1, lambdas.size):
            total += 2.0 * math.log(lambdas[j] - lambdas[i])
    return total


def _null_log_density(lambdas: np.ndarray, cfg: SpikedFConfig) -> float:
    return log_k_density_null(cfg.m, cfg.n, cfg.p) + _log_shape(lambdas, cfg)


def joint_density_null(lambdas, cfg: SpikedFConfig) -> float:
    lambdas = _check_lambdas(lambdas, cfg)
    return math.exp(_null_log_density(lambdas, cfg))


# ==================== SPIKED ====================

def _g_terms(lambdas: np.ndarray, cfg: SpikedFConfig):
    """Signed terms whose sum is g(y_1, ..., y_n)."""
    m, n, p, alpha, beta, eta = cfg.m, cfg.n, cfg.p, cfg.alpha, cfg.beta, cfg.eta
    log_c = math.log(eta) - math.log1p(eta)
    log_y = np.log(lambdas) - np.log1p(lambdas)
    log_one_minus_cy = np.log1p(eta / (1.0 + lambdas)) - math.log1p(eta)

    terms = []
    for k in range(n):
        # 1 / prod_{l != k} (y_k - y_l), with y_k - y_l = (lambda_k - lambda_l) / ((1+lambda_k)(1+lambda_l))
        sign, log_den = 1, 0.0
        for ell in range(n):
            if ell == k:
                continue
            diff = lambdas[k] - lambdas[ell]
            sign *= 1 if diff > 0 else -1
            log_den += math.log(abs(diff)) - math.log1p(lambdas[k]) - math.log1p(lambdas[ell])

        terms.append(LogScaled(
            sign,
            log_factorial(n + alpha) - (m - 1) * log_c - beta * log_y[k]
            - (n + alpha + 1) * log_one_minus_cy[k] - log_den,
        ))
        for j in range(beta):
            terms.append(LogScaled(
                -sign,
                log_factorial(p - j - 1) - log_factorial(beta - j - 1)
                - (n + j) * log_c - (j + 1) * log_y[k] - log_den,
            ))
    return terms


def joint_density_spiked(lambdas, cfg: SpikedFConfig) -> float:
    if cfg.eta <= 0:
        raise InvalidParameterError('eta = 0 has no spiked density; use joint_density_null')
    lambdas = _check_lambdas(lambdas, cfg)

    terms = _g_terms(lambdas, cfg)
    g = log_sum(terms)
    digits = cancellation_digits(terms, g)
    if digits <= TRUSTED_DIGITS:
        if g.sign < 0:
            raise NumericalInstabilityError(f'negative density at {lambdas.tolist()}')
        return _spiked_value(lambdas, cfg, g)

    if weak_spike_applies(cfg):
        # same density-ratio band as the c.d.f., applied pointwise
        log_lo, log_hi = weak_spike_band(cfg)
        null = math.exp(_null_log_density(lambdas, cfg))
        logger.warning(
            'density: %.1f digits cancelled in g (eta=%g); using the weak-spike band', digits, cfg.eta,
        )
        return null * (math.exp(log_lo) + math.exp(log_hi)) / 2

    logger.debug('density: %.1f digits cancelled in g (eta=%g); recomputing in extended precision', digits, cfg.eta)
    g = density_g_precise(lambdas.tolist(), cfg, digits)
    if g.sign < 0:
        raise NumericalInstabilityError(f'negative density at {lambdas.tolist()}')
    return _spiked_value(lambdas, cfg, g)


def _spiked_value(lambdas: np.ndarray, cfg: SpikedFConfig, g: LogScaled) -> float:
    if g.is_zero:
        return 0.0
    log_value = (
        log_k_density_spiked(cfg.m, cfg.n, cfg.p)
        - cfg.n * math.log1p(cfg.eta)
        + _log_shape(lambdas, cfg)
        + g.log_mag
    )
    return math.exp(log_value)
