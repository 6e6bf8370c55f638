"""
Scalar special functions used by the c.d.f. formulas

WHAT THIS FILE DOES:
- Pochhammer symbols (a)_k, with the truncation rule for negative integers
- Jacobi polynomials P_n^(a,b)(x) and their derivatives, summed as the
  terminating hypergeometric series (exactly n + 1 terms); below x = 1, where
  the series alternates, in exact rationals
- Terminating Gauss hypergeometric series 2F1(-N, b; c; z)
- The 2F1(n+a+1, k+1; k+2; z) values that appear inside Omega, reduced to a
  terminating series by the Euler transformation

Everything is composed in LogScaled form and only exponentiated at the end.
"""

import math
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .exceptions import InvalidParameterError
from .logscaled import ZERO, LogScaled, factorial_scaled, signed_log_sum


def _is_integer(value) -> bool:
    return float(value).is_integer()


def _is_nonpositive_integer(value) -> bool:
    return _is_integer(value) and value <= 0


def _check_order(k, name='k'):
    if not _is_integer(k) or k < 0:
        raise InvalidParameterError(f'{name} must be a nonnegative integer, got {k!r}')
    return int(k)


# ==================== POCHHAMMER ====================

def pochhammer_terms(a, k):
    """
    Signs and log-magnitudes of (a)_k for an array of orders k.

    For a = -n (n a nonnegative integer) the symbol is (-1)^k n!/(n-k)! up to
    k = n and exactly zero beyond.
    """
    k = np.asarray(k, dtype=np.int64)
    if _is_nonpositive_integer(a):
        n = int(round(-a))
        signs = np.where(k <= n, np.where(k % 2 == 0, 1, -1), 0)
        clipped = np.minimum(k, n)
        logs = gammaln(n + 1) - gammaln(n - clipped + 1)
        return signs, logs
    logs = gammaln(a + k) - gammaln(a)
    if a > 0:
        return np.ones_like(k), logs
    # a, a+1, ... stay negative for the first ceil(-a) factors
    negative = np.minimum(k, math.ceil(-a))
    return np.where(negative % 2 == 0, 1, -1), logs


def pochhammer(a, k) -> LogScaled:
    """Rising factorial (a)_k = a(a+1)...(a+k-1), with (a)_0 = 1."""
    k = _check_order(k)
    signs, logs = pochhammer_terms(a, [k])
    return LogScaled(int(signs[0]), float(logs[0]))


# ==================== HYPERGEOMETRIC ====================

def gauss_2f1_terminating(neg_int, b, c, z) -> LogScaled:
    """
    2F1(-N, b; c; z) summed over its N + 1 terms.

    The first parameter must be a nonpositive integer; c must not be one.
    """
    if not _is_nonpositive_integer(neg_int):
        raise InvalidParameterError(
            f'terminating series needs a nonpositive integer first parameter, got {neg_int!r}'
        )
    if _is_nonpositive_integer(c):
        raise InvalidParameterError(f'c must not be a nonpositive integer, got {c!r}')
    z = float(z)
    if not math.isfinite(z):
        raise InvalidParameterError(f'z must be finite, got {z!r}')

    order = int(round(-neg_int))
    k = np.arange(order + 1)
    s_top, l_top = pochhammer_terms(neg_int, k)
    s_b, l_b = pochhammer_terms(b, k)
    s_c, l_c = pochhammer_terms(c, k)

    if z == 0.0:
        s_z = np.where(k == 0, 1, 0)
        l_z = np.zeros(order + 1)
    else:
        s_z = np.where((k % 2 == 1) & (z < 0), -1, 1)
        l_z = k * math.log(abs(z))

    signs = s_top * s_b * s_c * s_z
    logs = l_top + l_b - l_c - gammaln(k + 1) + l_z
    return signed_log_sum(signs, logs)


def omega_2f1_scaled(n, alpha, k, z) -> LogScaled:
    """
    2F1(n+alpha+1, k+1; k+2; z) through the Euler transformation

        2F1(a, b; c; z) = (1 - z)^(c-a-b) 2F1(c-a, c-b; c; z),

    where c - a = k + 1 - n - alpha <= 0 makes the right-hand series finite.
    """
    for name, value in (('n', n), ('alpha', alpha), ('k', k)):
        _check_order(value, name)
    if n < 1:
        raise InvalidParameterError(f'n must be positive, got {n}')
    if k > n + alpha - 1:
        raise InvalidParameterError(f'k={k} outside 0..{n + alpha - 1}')
    z = float(z)
    if not z < 1.0:
        raise InvalidParameterError(f'z={z} must be below 1')

    euler = LogScaled(1, -(n + alpha) * math.log1p(-z))
    return euler * gauss_2f1_terminating(k + 1 - n - alpha, 1, k + 2, z)


def omega_2f1(n, alpha, k, z) -> float:
    return omega_2f1_scaled(n, alpha, k, z).to_float()


# ==================== JACOBI POLYNOMIALS ====================

def _check_jacobi(n, a, b):
    n = _check_order(n, 'n')
    if not (a > -1 and b > -1):
        raise InvalidParameterError(f'Jacobi parameters need a, b > -1, got a={a}, b={b}')
    return n


def _jacobi_exact(n, a, b, x) -> LogScaled:
    """Below x = 1 the series alternates; it is summed in exact rationals instead."""
    a, b = Fraction(float(a)), Fraction(float(b))
    z = (1 - Fraction(float(x))) / 2
    term, total = Fraction(1), Fraction(0)
    for k in range(n + 1):
        total += term
        term *= (k - n) * (n + a + b + 1 + k) * z / ((a + 1 + k) * (k + 1))
    value = total * math.prod((a + 1 + k for k in range(n)), start=Fraction(1)) / math.factorial(n)
    if value == 0:
        return ZERO
    try:
        rounded = float(value)
    except OverflowError:
        rounded = 0.0
    if rounded != 0.0:
        return LogScaled.from_float(rounded)
    return LogScaled(1 if value > 0 else -1, math.log(abs(value.numerator)) - math.log(value.denominator))


def jacobi_p_scaled(n, a, b, x) -> LogScaled:
    """
    P_n^(a,b)(x) = (a+1)_n / n! * 2F1(-n, n+a+b+1; a+1; (1-x)/2).

    Exact at x = 1, where the series collapses to its first term. From x = 1
    upwards every term is positive and the log-domain sum loses nothing.
    """
    n = _check_jacobi(n, a, b)
    if x < 1.0:
        return _jacobi_exact(n, a, b, x)
    series = gauss_2f1_terminating(-n, n + a + b + 1, a + 1, (1.0 - x) / 2.0)
    return pochhammer(a + 1, n) / factorial_scaled(n) * series


def jacobi_p(n, a, b, x) -> float:
    return jacobi_p_scaled(n, a, b, x).to_float()


def jacobi_p_deriv(n, a, b, k, x) -> float:
    """k-th derivative: 2^-k (n+a+b+1)_k P_{n-k}^(a+k, b+k)(x), zero once k > n."""
    n = _check_jacobi(n, a, b)
    k = _check_order(k)
    if k > n:
        return 0.0
    if k == 0:
        return jacobi_p(n, a, b, x)
    scale = LogScaled(1, -k * math.log(2.0)) * pochhammer(n + a + b + 1, k)
    return (scale * jacobi_p_scaled(n - k, a + k, b + k, x)).to_float()


__all__ = [
    'gauss_2f1_terminating',
    'jacobi_p',
    'jacobi_p_deriv',
    'jacobi_p_scaled',
    'omega_2f1',
    'omega_2f1_scaled',
    'pochhammer',
    'pochhammer_terms',
]
