"""
Detector types

WHAT THIS FILE DOES:
- DetectorConfig: the (m, n, p) triple seen by the largest-eigenvalue test,
  with the SNR gamma carried in the eta field under H1
- RocPoint: one (pf, pd) pair and where it came from
- AsymptoticRegime: (c, n) with gamma/m -> c as m, p -> infinity
"""

import math
from dataclasses import dataclass

from django.db import models

from cdf_exact.config import Probability, SpikedFConfig
from special_functions.exceptions import InvalidParameterError


class Provenance(models.TextChoices):
    EXACT = 'exact', 'Exact (determinant formula)'
    CLOSED_FORM_ALPHA0 = 'closed_form_alpha0', 'Closed form, p = m'
    CLOSED_FORM_N1 = 'closed_form_n1', 'Closed form, n = 1'
    ASYMPTOTIC = 'asymptotic', 'Asymptotic limit'
    UPPER_BOUND = 'upper_bound', 'Asymptotic upper bound'
    EMPIRICAL = 'empirical', 'Monte Carlo'


@dataclass(frozen=True)
class DetectorConfig:
    """
    The eigenvalue test statistic lives on the scale of the whitened sample
    covariance; the c.d.f. formulas are written for kappa * statistic.
    """

    base: SpikedFConfig

    @classmethod
    def build(cls, m, n, p, gamma=0.0) -> 'DetectorConfig':
        return cls(SpikedFConfig(m=m, n=n, p=p, eta=gamma))

    @property
    def kappa(self) -> float:
        return self.base.kappa

    @property
    def null(self) -> SpikedFConfig:
        return self.base.with_eta(0.0)

    def spiked(self, gamma) -> SpikedFConfig:
        return self.base.with_eta(gamma)


@dataclass(frozen=True)
class RocPoint:
    pf: Probability
    pd: Probability
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, 'pf', Probability(self.pf))
        object.__setattr__(self, 'pd', Probability(self.pd))
        object.__setattr__(self, 'provenance', Provenance(self.provenance))


@dataclass(frozen=True)
class AsymptoticRegime:
    c: float
    n: int

    def __post_init__(self):
        c = float(self.c)
        if not (math.isfinite(c) and c >= 0):
            raise InvalidParameterError(f'c must be a finite nonnegative number, got {self.c!r}')
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f'n must be a positive integer, got {self.n!r}')
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'n', int(self.n))
