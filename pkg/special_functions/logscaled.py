"""
Sign + log-magnitude scalars

WHAT THIS FILE DOES:
- LogScaled stores a real number as (sign, log|value|)
- Products and quotients become sums and differences of logs, so factorial
  ratios with m, n, p in the hundreds never overflow
- Sums go through max-shifted exponentiation with exactly rounded (fsum)
  accumulation
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy.special import gammaln

from .exceptions import InvalidParameterError, NumericalInstabilityError

Number = Union[int, float]

# math.exp overflows above this
_MAX_LOG = math.log(np.finfo(float).max)


@dataclass(frozen=True, slots=True)
class LogScaled:
    """A real value kept as sign * exp(log_mag)."""

    sign: int
    log_mag: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise InvalidParameterError(f'sign must be -1, 0 or 1, got {self.sign!r}')
        if math.isnan(self.log_mag):
            raise InvalidParameterError('log_mag is NaN')
        # every zero is the same zero, whatever log_mag was passed
        if self.sign == 0 and self.log_mag != -math.inf:
            object.__setattr__(self, 'log_mag', -math.inf)
        elif self.sign != 0 and self.log_mag == -math.inf:
            object.__setattr__(self, 'sign', 0)

    # ==================== CONSTRUCTION ====================

    @classmethod
    def from_float(cls, value: Number) -> LogScaled:
        value = float(value)
        if not math.isfinite(value):
            raise InvalidParameterError(f'cannot log-scale non-finite value {value!r}')
        if value == 0.0:
            return cls(0, -math.inf)
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> LogScaled:
        return cls(sign, float(log_mag))

    @classmethod
    def coerce(cls, value: Union[LogScaled, Number]) -> LogScaled:
        if isinstance(value, LogScaled):
            return value
        return cls.from_float(value)

    # ==================== CONVERSION ====================

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_mag > _MAX_LOG:
            raise NumericalInstabilityError(
                f'value exp({self.log_mag:.6g}) overflows a double'
            )
        return self.sign * math.exp(self.log_mag)

    def __float__(self) -> float:
        return self.to_float()

    def __bool__(self) -> bool:
        return self.sign != 0

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def log10_mag(self) -> float:
        return self.log_mag / math.log(10.0)

    # ==================== ARITHMETIC ====================

    def __neg__(self) -> LogScaled:
        return LogScaled(-self.sign, self.log_mag)

    def __abs__(self) -> LogScaled:
        return LogScaled(abs(self.sign), self.log_mag)

    def __mul__(self, other: Union[LogScaled, Number]) -> LogScaled:
        other = LogScaled.coerce(other)
        sign = self.sign * other.sign
        if sign == 0:
            return ZERO
        return LogScaled(sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other: Union[LogScaled, Number]) -> LogScaled:
        other = LogScaled.coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError('division by a LogScaled zero')
        if self.sign == 0:
            return ZERO
        return LogScaled(self.sign * other.sign, self.log_mag - other.log_mag)

    def __rtruediv__(self, other: Union[LogScaled, Number]) -> LogScaled:
        return LogScaled.coerce(other) / self

    def __add__(self, other: Union[LogScaled, Number]) -> LogScaled:
        return log_sum((self, LogScaled.coerce(other)))

    __radd__ = __add__

    def __sub__(self, other: Union[LogScaled, Number]) -> LogScaled:
        return log_sum((self, -LogScaled.coerce(other)))

    def __rsub__(self, other: Union[LogScaled, Number]) -> LogScaled:
        return log_sum((LogScaled.coerce(other), -self))

    def __pow__(self, exponent: Number) -> LogScaled:
        if self.sign == 0:
            if exponent == 0:
                return ONE
            if exponent > 0:
                return ZERO
            raise ZeroDivisionError('negative power of a LogScaled zero')
        if self.sign < 0:
            if not float(exponent).is_integer():
                raise InvalidParameterError('non-integer power of a negative value')
            sign = -1 if int(exponent) % 2 else 1
        else:
            sign = 1
        return LogScaled(sign, self.log_mag * exponent)


ZERO = LogScaled(0, -math.inf)
ONE = LogScaled(1, 0.0)


def signed_log_sum(signs, logs) -> LogScaled:
    """
    Sum of sign[k] * exp(logs[k]) without leaving the log domain.

    Terms are shifted by the largest log before exponentiation and added
    with math.fsum, so the result is exactly rounded for the shifted values.
    """
    signs = np.asarray(signs, dtype=np.int64).ravel()
    logs = np.asarray(logs, dtype=float).ravel()
    live = signs != 0
    if not np.any(live):
        return ZERO
    signs, logs = signs[live], logs[live]
    shift = float(np.max(logs))
    if not math.isfinite(shift):
        raise NumericalInstabilityError(f'series term with log magnitude {shift}')
    total = math.fsum((signs * np.exp(logs - shift)).tolist())
    if total == 0.0:
        return ZERO
    return LogScaled(1 if total > 0 else -1, math.log(abs(total)) + shift)


def log_sum(terms: Iterable[LogScaled]) -> LogScaled:
    terms = [t for t in terms if t.sign != 0]
    if not terms:
        return ZERO
    return signed_log_sum([t.sign for t in terms], [t.log_mag for t in terms])


def cancellation_digits(terms: Iterable[LogScaled], total: LogScaled) -> float:
    """Decimal digits lost when `terms` were added up to `total`."""
    largest = max((t.log10_mag for t in terms if t.sign != 0), default=-math.inf)
    if largest == -math.inf:
        return 0.0
    if total.sign == 0:
        return math.inf
    return max(0.0, largest - total.log10_mag)


def log_factorial(n: int) -> float:
    """log(n!) for a nonnegative integer n."""
    if int(n) != n or n < 0:
        raise InvalidParameterError(f'factorial needs a nonnegative integer, got {n!r}')
    return float(gammaln(int(n) + 1))


def factorial_scaled(n: int) -> LogScaled:
    return LogScaled(1, log_factorial(n))
