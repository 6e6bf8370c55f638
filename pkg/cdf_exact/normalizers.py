"""
Log-domain normalising constants.

All constants are returned as natural logs; callers fold them into LogScaled
products.
"""

import math

from scipy.special import gammaln

from special_functions.logscaled import log_factorial

LOG_PI = math.log(math.pi)


def log_complex_multivariate_gamma(dim: int, z: float) -> float:
    """log of pi^(dim(dim-1)/2) * prod_{j=1..dim} Gamma(z - j + 1)."""
    return dim * (dim - 1) / 2 * LOG_PI + sum(float(gammaln(z - j + 1)) for j in range(1, dim + 1))


def log_k_alpha(m: int, n: int, alpha: int) -> float:
    """
    Constant in front of the spiked c.d.f.:

        1/(n-1)! * prod_{j=1..alpha} (m+n+j-2)! / (m+n+2j-2)!

    The 1/(n-1)! appears once, whatever alpha is; at alpha = 0 this is the
    constant of the closed-form alpha = 0 c.d.f.
    """
    total = -log_factorial(n - 1)
    for j in range(1, alpha + 1):
        total += log_factorial(m + n + j - 2) - log_factorial(m + n + 2 * j - 2)
    return total


def log_k_null(m: int, n: int, alpha: int) -> float:
    """prod_{k=1..alpha} (m+n+k-1)! / (m+n+2k-2)!"""
    return sum(
        log_factorial(m + n + k - 1) - log_factorial(m + n + 2 * k - 2)
        for k in range(1, alpha + 1)
    )


def log_k_density_null(m: int, n: int, p: int) -> float:
    return (
        n * (n - 1) * LOG_PI
        + log_complex_multivariate_gamma(m, n + p)
        - log_complex_multivariate_gamma(m, p)
        - log_complex_multivariate_gamma(n, n)
        - log_complex_multivariate_gamma(n, m)
    )


def log_k_density_spiked(m: int, n: int, p: int) -> float:
    return log_k_density_null(m, n, p) + float(gammaln(m)) - float(gammaln(n + p))
