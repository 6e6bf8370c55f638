"""
C.d.f. of the largest eigenvalue

WHAT THIS FILE DOES:
- cdf_max_null:      eta = 0, one alpha x alpha determinant of Psi entries
- cdf_max_spiked:    eta > 0, two (alpha+1) x (alpha+1) determinants
                     [Omega | Psi] and [(-1)^(i-1) Phi | Psi]
- cdf_alpha0_spiked: the p = m closed form with the 2F1 reduced to a finite
                     double sum; no determinant at all

The determinant order is alpha + 1 = p - m + 1 whatever m and n are.

CANCELLATION:
The two terms of the spiked formula nearly cancel when eta * y is small, and
the alternating sums and determinants feeding them cancel too. Every one of
these losses is counted in decimal digits. Their total decides what happens:
- up to TRUSTED_DIGITS: the double precision value is returned
- beyond that, with (1+eta)^(p+n) - 1 <= WEAK_SPIKE_TOLERANCE: the midpoint of
      (1+eta)^-n F_null(x) <= F_spiked(x) <= (1+eta)^p F_null(x)
  which is then within WEAK_SPIKE_TOLERANCE / 2 of the value, relatively
- otherwise: the terms are recomputed in extended precision (precise.py)
"""

import logging
import math

from linalg_core.decompositions import determinant_digits, logdet_scaled
from special_functions.exceptions import InvalidParameterError, NumericalInstabilityError
from special_functions.logscaled import LogScaled, cancellation_digits, log_factorial, log_sum

from .config import PROBABILITY_TOLERANCE, Probability, SpikedFConfig
from .entries import omega_tracked, phi_entry, psi_scaled
from .normalizers import log_k_alpha, log_k_null
from .precise import cdf_alpha0_precise, cdf_spiked_precise

logger = logging.getLogger(__name__)

# beyond this many lost digits a double result can miss 1e-9 relative accuracy
TRUSTED_DIGITS = 5.0
WEAK_SPIKE_TOLERANCE = 1e-4


# ==================== HELPERS ====================

def _check_x(x) -> float:
    x = float(x)
    if math.isnan(x) or x < 0:
        raise InvalidParameterError(f'x must be a nonnegative number, got {x!r}')
    return x


def _check_probability(value: float, x: float) -> Probability:
    if not (-PROBABILITY_TOLERANCE <= value <= 1.0 + PROBABILITY_TOLERANCE):
        raise NumericalInstabilityError(f'c.d.f. evaluated to {value!r} at x={x}')
    return Probability(value)


def _to_probability(total: LogScaled, x: float) -> Probability:
    return _check_probability(total.to_float(), x)


def weak_spike_band(cfg: SpikedFConfig):
    """
    Log bounds of the spiked-to-null density ratio.

    The ratio lies in [(1+eta)^-n, (1+eta)^p] for every eigenvalue vector.
    """
    log_growth = math.log1p(cfg.eta)
    return -cfg.n * log_growth, cfg.p * log_growth


def weak_spike_applies(cfg: SpikedFConfig) -> bool:
    """True when the band's upper end is within WEAK_SPIKE_TOLERANCE of its lower end, relatively."""
    log_lo, log_hi = weak_spike_band(cfg)
    return math.expm1(log_hi - log_lo) <= WEAK_SPIKE_TOLERANCE


def _resolve(first: LogScaled, second: LogScaled, inner_digits: float, x: float, cfg: SpikedFConfig,
             precise) -> Probability:
    total = first + second
    digits = cancellation_digits((first, second), total) + inner_digits
    if digits <= TRUSTED_DIGITS:
        return _to_probability(total, x)

    if weak_spike_applies(cfg):
        null = float(cdf_max_null(x, cfg))
        log_lo, log_hi = weak_spike_band(cfg)
        lo, hi = null * math.exp(log_lo), min(1.0, null * math.exp(log_hi))
        logger.warning(
            'x=%g: %.1f digits cancelled (m=%d, n=%d, p=%d, eta=%g); using the weak-spike band [%.6g, %.6g]',
            x, digits, cfg.m, cfg.n, cfg.p, cfg.eta, lo, hi,
        )
        return Probability((lo + hi) / 2)

    logger.debug(
        'x=%g: %.1f digits cancelled (m=%d, n=%d, p=%d, eta=%g); recomputing in extended precision',
        x, digits, cfg.m, cfg.n, cfg.p, cfg.eta,
    )
    return _check_probability(precise(digits), x)


# ==================== NULL ====================

def log_null_scaled(y: float, log_y: float, cfg: SpikedFConfig) -> LogScaled:
    alpha = cfg.alpha
    columns = [
        [psi_scaled(i + 1, j + 1, y, cfg) for i in range(1, alpha + 1)]
        for j in range(1, alpha + 1)
    ]
    det = logdet_scaled(columns)
    return LogScaled(1, log_k_null(cfg.m, cfg.n, alpha) + cfg.n * (cfg.m + alpha) * log_y) * det


def cdf_max_null(x, cfg: SpikedFConfig) -> Probability:
    """F(x; 0) = const * y^(n(m+alpha)) * det[Psi_{i+1,j+1}(y)], y = x/(1+x)."""
    x = _check_x(x)
    if x == 0.0:
        return Probability(0.0)
    if math.isinf(x):
        return Probability(1.0)
    log_y = math.log(x) - math.log1p(x)
    return _to_probability(log_null_scaled(x / (1.0 + x), log_y, cfg), x)


# ==================== SPIKED ====================

def spiked_terms(x: float, cfg: SpikedFConfig):
    """
    The two signed terms of the spiked c.d.f., constants included, and the
    digits already lost inside them (worst Omega sum plus worst determinant).
    """
    m, n, alpha, eta = cfg.m, cfg.n, cfg.alpha, cfg.eta
    y = x / (1.0 + x)
    log_y = math.log(x) - math.log1p(x)
    log_c = math.log(eta) - math.log1p(eta)
    # 1 - c y = (1 + eta (1 - y)) / (1 + eta), with 1 - y = 1 / (1 + x)
    log_one_minus_cy = math.log1p(eta / (1.0 + x)) - math.log1p(eta)

    rows = range(1, alpha + 2)
    psi_columns = [[psi_scaled(i, j, y, cfg) for i in rows] for j in range(2, alpha + 2)]
    omegas = [omega_tracked(i, y, cfg) for i in rows]
    omega_column = [value for value, _ in omegas]
    phi_column = [phi_entry(i, y, cfg) * (-1 if (i - 1) % 2 else 1) for i in rows]
    logger.debug('spiked c.d.f. at x=%g: determinants of order %d', x, alpha + 1)

    omega_matrix = [omega_column] + psi_columns
    phi_matrix = [phi_column] + psi_columns
    omega_det = logdet_scaled(omega_matrix)
    phi_det = logdet_scaled(phi_matrix)
    inner_digits = max(digits for _, digits in omegas) + max(
        determinant_digits(omega_matrix, omega_det), determinant_digits(phi_matrix, phi_det),
    )

    log_const = log_k_alpha(m, n, alpha) - n * math.log1p(eta)
    first = LogScaled(
        1,
        log_const
        + log_factorial(n + alpha)
        + (n * (alpha + m) - m + 1) * log_y
        - (m - 1) * log_c
        - (n + alpha + 1) * log_one_minus_cy,
    ) * omega_det
    second = LogScaled(
        -1 if n % 2 else 1,
        log_const - n * log_c + n * (m + alpha - 1) * log_y,
    ) * phi_det
    return first, second, inner_digits


def cdf_max_spiked(x, cfg: SpikedFConfig) -> Probability:
    if cfg.eta <= 0:
        raise InvalidParameterError('eta = 0 has no spiked formula; use cdf_max_null')
    x = _check_x(x)
    if x == 0.0:
        return Probability(0.0)
    if math.isinf(x):
        return Probability(1.0)
    first, second, inner_digits = spiked_terms(x, cfg)
    return _resolve(
        first, second, inner_digits, x, cfg,
        lambda digits: cdf_spiked_precise(x, cfg, digits),
    )


# ==================== ALPHA = 0 CLOSED FORM ====================

def alpha0_terms(x: float, m: int, n: int, eta: float):
    """Both terms of the p = m closed form, each a finite sum, and the digits the outer k-sum lost."""
    log_x, log1p_x = math.log(x), math.log1p(x)
    log_eta, log1p_eta = math.log(eta), math.log1p(eta)
    log_shift = math.log(1.0 + eta + x)
    # -eta x / (1 + eta + x) is the 2F1 argument; its powers enter with signs folded in
    log_w = log_eta + log_x - log_shift

    outer = []
    for k in range(n):
        inner = []
        top = n - k - 1
        for ell in range(top + 1):
            # (N)_ell falling over (k+2)_ell rising: the (1)_ell of the series cancels ell!
            inner.append(LogScaled(
                1,
                log_factorial(top) - log_factorial(top - ell)
                + log_factorial(k + 1) - log_factorial(k + ell + 1)
                + ell * log_w,
            ))
        coef = LogScaled(
            -1 if k % 2 else 1,
            log_factorial(m + k - 1) - log_factorial(k) - log_factorial(k + 1) - log_factorial(top),
        )
        outer.append(coef * log_sum(inner))
    outer_sum = log_sum(outer)

    first = LogScaled(
        1,
        log_factorial(n)
        + m * log1p_eta
        + (m * (n - 1) + 1) * log_x
        - log_factorial(m - 1)
        - (m - 1) * log_eta
        - (m * n - m - n) * log1p_x
        - (n + 1) * log_shift
        # Euler prefactor of each 2F1
        + n * log_shift - n * log1p_eta - n * log1p_x,
    ) * outer_sum

    log_c = log_eta - log1p_eta
    tail = [
        LogScaled(
            1,
            log_factorial(n + k - 1) - log_factorial(k) - k * log_c
            + (n * (m - 1) - k) * (log_x - log1p_x),
        )
        for k in range(m - n)
    ]
    second = LogScaled(-1 if n % 2 else 1, -log_factorial(n - 1) - n * log_eta) * log_sum(tail)
    return first, second, cancellation_digits(outer, outer_sum)


def cdf_alpha0_spiked(x, m: int, n: int, eta: float) -> Probability:
    cfg = SpikedFConfig(m=m, n=n, p=m, eta=eta)
    if cfg.eta <= 0:
        raise InvalidParameterError('eta = 0 has no spiked formula; the null c.d.f. is (x/(1+x))^(mn)')
    x = _check_x(x)
    if x == 0.0:
        return Probability(0.0)
    if math.isinf(x):
        return Probability(1.0)
    first, second, inner_digits = alpha0_terms(x, cfg.m, cfg.n, cfg.eta)
    return _resolve(
        first, second, inner_digits, x, cfg,
        lambda digits: cdf_alpha0_precise(x, cfg.m, cfg.n, cfg.eta, digits),
    )
