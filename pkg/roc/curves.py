"""
Closed-form and asymptotic ROC profiles

WHAT THIS FILE DOES:
- roc_alpha0_closed_form:     p = m, pd from the alpha = 0 c.d.f. without root finding
- roc_n1_closed_form:         p = m, n = 1 reduces to a one-line formula
- roc_n1_expansion:           first-order large-m behaviour of the n = 1 curve
- roc_asymptotic:             m, p -> infinity with gamma / m -> c
- roc_asymptotic_upper_bound: 1 - (1 - pf)^(c + 1)
- default_pf_grid / linear_pf_grid: false alarm grids for the profiles above
"""

import math

import numpy as np

from cdf_exact.config import Probability, SpikedFConfig
from cdf_exact.distributions import cdf_alpha0_spiked
from special_functions.exceptions import InvalidParameterError

from .types import AsymptoticRegime

DEFAULT_GRID_POINTS = 101
DEFAULT_GRID_MIN = 1e-4


def _check_pf(pf) -> float:
    return float(Probability(pf))


def _check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma >= 0):
        raise InvalidParameterError(f'gamma must be a finite nonnegative number, got {gamma!r}')
    return gamma


# ==================== P = M ====================

def roc_alpha0_closed_form(gamma, m, n, pf) -> Probability:
    """pd = 1 - F0(u / (1 - u); gamma) with u = (1 - pf)^(1/(nm))."""
    SpikedFConfig(m=m, n=n, p=m)
    gamma, pf = _check_gamma(gamma), _check_pf(pf)
    if pf == 0.0 or pf == 1.0 or gamma == 0.0:
        return Probability(pf)
    log_u = math.log1p(-pf) / (n * m)
    # u / (1 - u) without forming 1 - u
    x = math.exp(log_u) / -math.expm1(log_u)
    return Probability(1.0 - cdf_alpha0_spiked(x, m, n, gamma))


def roc_n1_closed_form(gamma, m, pf) -> Probability:
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise InvalidParameterError(f'm must be an integer >= 2, got {m!r}')
    gamma, pf = _check_gamma(gamma), _check_pf(pf)
    miss = 1.0 - pf
    return Probability(1.0 - miss / (1.0 + gamma - gamma * miss ** (1.0 / m)))


def roc_n1_expansion(gamma, m, pf) -> float:
    """pf - (1 - pf) ln(1 - pf) gamma / m; accurate while gamma / m is small."""
    gamma, pf = _check_gamma(gamma), _check_pf(pf)
    if pf == 1.0:
        return 1.0
    return pf - (1.0 - pf) * math.log1p(-pf) * gamma / m


# ==================== ASYMPTOTIC ====================

def roc_asymptotic(regime: AsymptoticRegime, pf) -> Probability:
    pf = _check_pf(pf)
    if pf == 1.0:
        return Probability(1.0)
    log_miss = math.log1p(-pf)
    growth = math.log1p(-(regime.c / regime.n) * log_miss)
    return Probability(1.0 - math.exp(log_miss - regime.n * growth))


def roc_asymptotic_upper_bound(c, pf) -> Probability:
    c, pf = _check_gamma(c), _check_pf(pf)
    if pf == 1.0:
        return Probability(1.0)
    return Probability(-math.expm1((c + 1.0) * math.log1p(-pf)))


# ==================== GRIDS ====================

def default_pf_grid(points: int = DEFAULT_GRID_POINTS, lower: float = DEFAULT_GRID_MIN) -> np.ndarray:
    """Log-spaced false alarm rates in [lower, 1 - lower]."""
    if points < 2 or not 0.0 < lower < 0.5:
        raise InvalidParameterError(f'bad pf grid: points={points}, lower={lower}')
    return np.geomspace(lower, 1.0 - lower, points)


def linear_pf_grid(start: float, stop: float, count: int) -> np.ndarray:
    if count < 1 or not (0.0 <= start <= stop <= 1.0):
        raise InvalidParameterError(f'bad pf grid: {start}:{stop}:{count}')
    return np.linspace(start, stop, count)
