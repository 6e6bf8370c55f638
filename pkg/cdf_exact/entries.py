"""
Matrix entries of the c.d.f. determinants

WHAT THIS FILE DOES:
- psi_entry:   (m+i-1)_{j-2} P_{n+i-j}^{(j-2, m-n+j-2)}(2/y - 1)
- phi_entry:   sum_{k<m-n} (m+a-k-1)!(n+k+i-2)! / [k!(m+i-k-2)! c^k y^k]
- omega_entry: (n+i-2)!/(m+i-2)! sum_k (-1)^k (m+i+k-2)! / [(n+i-2-k)! k! (k+1)!]
                 * 2F1(n+a+1, k+1; k+2; -y eta / (1 + eta (1-y)))

Everything here works in the transformed variable y = x / (1 + x).
"""

import math

import numpy as np
from scipy.special import gammaln

from special_functions.exceptions import InvalidParameterError
from special_functions.functions import jacobi_p_scaled, omega_2f1_scaled, pochhammer
from special_functions.logscaled import (
    ZERO,
    LogScaled,
    cancellation_digits,
    log_factorial,
    log_sum,
    signed_log_sum,
)


def _check_row(i, cfg):
    if not (1 <= i <= cfg.alpha + 1):
        raise InvalidParameterError(f'row index i={i} outside 1..{cfg.alpha + 1}')


def _check_spiked(cfg):
    if cfg.eta <= 0:
        raise InvalidParameterError('eta = 0 has no spiked formula; use the null c.d.f.')


# ==================== PSI ====================

def psi_scaled(i, j, y, cfg) -> LogScaled:
    """Psi_{i,j}(y) without range checks; a negative Jacobi degree gives zero."""
    degree = cfg.n + i - j
    if degree < 0:
        # derivative of order j-2 of a polynomial of degree n+i-2
        return ZERO
    t = 2.0 / y - 1.0
    return pochhammer(cfg.m + i - 1, j - 2) * jacobi_p_scaled(degree, j - 2, cfg.beta + j - 2, t)


def psi_entry(i, j, y, cfg) -> LogScaled:
    _check_row(i, cfg)
    if not (2 <= j <= cfg.alpha + 1):
        raise InvalidParameterError(f'column index j={j} outside 2..{cfg.alpha + 1}')
    if cfg.n + i - j < 0:
        raise InvalidParameterError(f'Jacobi degree n+i-j={cfg.n + i - j} is negative')
    if not 0.0 < y <= 1.0:
        raise InvalidParameterError(f'y={y} outside (0, 1]')
    return psi_scaled(i, j, y, cfg)


# ==================== PHI ====================

def phi_entry(i, y, cfg) -> LogScaled:
    _check_row(i, cfg)
    _check_spiked(cfg)
    if not 0.0 < y <= 1.0:
        raise InvalidParameterError(f'y={y} outside (0, 1]')

    m, n, alpha = cfg.m, cfg.n, cfg.alpha
    k = np.arange(cfg.beta)
    log_cy = math.log(cfg.eta) - math.log1p(cfg.eta) + math.log(y)
    logs = (
        gammaln(m + alpha - k)
        + gammaln(n + k + i - 1)
        - gammaln(k + 1)
        - gammaln(m + i - k - 1)
        - k * log_cy
    )
    return signed_log_sum(np.ones_like(k), logs)


# ==================== OMEGA ====================

def omega_argument(y, eta) -> float:
    return -y * eta / (1.0 + eta * (1.0 - y))


def omega_scaled(i, y, cfg) -> LogScaled:
    """Omega_i(y) for y in [0, 1]; the alternating sum is accumulated with fsum."""
    return omega_tracked(i, y, cfg)[0]


def omega_tracked(i, y, cfg):
    """Omega_i(y) and the decimal digits its alternating k-sum cancelled."""
    m, n, alpha = cfg.m, cfg.n, cfg.alpha
    top = n + i - 2
    z = omega_argument(y, cfg.eta)
    terms = []
    for k in range(top + 1):
        log_coef = (
            log_factorial(m + i + k - 2)
            - log_factorial(top - k)
            - log_factorial(k)
            - log_factorial(k + 1)
        )
        coef = LogScaled(-1 if k % 2 else 1, log_coef)
        terms.append(coef * omega_2f1_scaled(n, alpha, k, z))
    prefactor = LogScaled(1, log_factorial(top) - log_factorial(m + i - 2))
    total = log_sum(terms)
    return prefactor * total, cancellation_digits(terms, total)


def omega_entry(i, y, cfg) -> float:
    _check_row(i, cfg)
    _check_spiked(cfg)
    if not 0.0 <= y < 1.0:
        raise InvalidParameterError(f'y={y} outside [0, 1)')
    return omega_scaled(i, y, cfg).to_float()
