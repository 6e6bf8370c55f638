"""
Reference curve drawn next to the sample-deficient c.d.f.

When there are at least as many signal-bearing samples as dimensions the
largest eigenvalue has the one-line c.d.f.

    (x / (1 + x))^(m n) / (1 + eta / (1 + x))^n

`cdf --reference` evaluates it at n = m, the boundary between the singular
and the non-singular signal covariance.
"""

import math

from cdf_exact.config import Probability
from special_functions.exceptions import InvalidParameterError


def cdf_non_deficient(x, m: int, n: int, eta) -> Probability:
    x, eta = float(x), float(eta)
    if math.isnan(x) or x < 0:
        raise InvalidParameterError(f'x must be a nonnegative number, got {x!r}')
    if not (math.isfinite(eta) and eta >= 0):
        raise InvalidParameterError(f'eta must be a finite nonnegative number, got {eta!r}')
    if m < 1 or n < 1:
        raise InvalidParameterError(f'm and n must be positive, got m={m}, n={n}')
    if x == 0.0:
        return Probability(0.0)
    if math.isinf(x):
        return Probability(1.0)
    log_value = m * n * (math.log(x) - math.log1p(x)) - n * math.log1p(eta / (1.0 + x))
    return Probability(math.exp(log_value))
