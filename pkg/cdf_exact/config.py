"""
Parameter and result types

WHAT THIS FILE DOES:
- SpikedFConfig owns the dimension triple (m, n, p) and the spike strength
- Probability is a float that is guaranteed to lie in [0, 1]

STANDING ASSUMPTION: p >= m > n >= 1. The signal-bearing sample covariance is
singular (n < m), the noise-only one is not (p >= m).
"""

import math
from dataclasses import dataclass, replace

from special_functions.exceptions import InvalidParameterError

MAX_M = 256
MAX_ALPHA = 48
PROBABILITY_TOLERANCE = 1e-9


def _as_int(name, value):
    if isinstance(value, bool) or not float(value).is_integer():
        raise InvalidParameterError(f'{name} must be an integer, got {value!r}')
    return int(value)


@dataclass(frozen=True)
class SpikedFConfig:
    """
    Dimensions of the singular F-matrix problem.

    m   -- system dimension
    n   -- signal-plus-noise samples
    p   -- noise-only samples
    eta -- spike strength (the SNR gamma under H1), 0 for the null case
    """

    m: int
    n: int
    p: int
    eta: float = 0.0

    def __post_init__(self):
        for name in ('m', 'n', 'p'):
            object.__setattr__(self, name, _as_int(name, getattr(self, name)))
        eta = float(self.eta)
        object.__setattr__(self, 'eta', eta)

        if self.n < 1:
            raise InvalidParameterError(f'n must be at least 1, got {self.n}')
        if self.m <= self.n:
            raise InvalidParameterError(
                f'requires m > n (sample-deficient signal covariance), got m={self.m}, n={self.n}'
            )
        if self.p < self.m:
            raise InvalidParameterError(
                f'requires p >= m (non-singular noise covariance estimate), got p={self.p}, m={self.m}'
            )
        if self.m > MAX_M:
            raise InvalidParameterError(f'm={self.m} above the supported limit {MAX_M}')
        if self.alpha > MAX_ALPHA:
            raise InvalidParameterError(f'p - m = {self.alpha} above the supported limit {MAX_ALPHA}')
        if not (math.isfinite(eta) and eta >= 0):
            raise InvalidParameterError(f'eta must be a finite nonnegative number, got {self.eta!r}')

    @property
    def alpha(self) -> int:
        return self.p - self.m

    @property
    def beta(self) -> int:
        return self.m - self.n

    @property
    def c_eta(self) -> float:
        return self.eta / (1.0 + self.eta)

    @property
    def kappa(self) -> float:
        return self.n / self.p

    def with_eta(self, eta) -> 'SpikedFConfig':
        return replace(self, eta=eta)


class Probability(float):
    """A float in [0, 1]; overshoot up to 1e-9 is clamped, anything more is refused."""

    def __new__(cls, value):
        value = float(value)
        if math.isnan(value) or not (-PROBABILITY_TOLERANCE <= value <= 1.0 + PROBABILITY_TOLERANCE):
            raise InvalidParameterError(f'{value!r} is not a probability')
        return super().__new__(cls, min(1.0, max(0.0, value)))
