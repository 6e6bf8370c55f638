"""
Counter-based random streams

Every trial owns a generator keyed by (seed, stream_id, hypothesis, trial),
so what trial t draws never depends on which worker ran it or in what order.
"""

from dataclasses import dataclass

import numpy as np
from django.db import models

from special_functions.exceptions import InvalidParameterError

_UINT64 = 2 ** 64


class Hypothesis(models.TextChoices):
    H0 = 'H0', 'Noise only'
    H1 = 'H1', 'Signal plus noise'

    @property
    def code(self) -> int:
        return 0 if self is Hypothesis.H0 else 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ('seed', 'stream_id'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value < _UINT64:
                raise InvalidParameterError(f'{name} must be an unsigned 64-bit integer, got {value!r}')
            object.__setattr__(self, name, int(value))

    def trial_generator(self, hypothesis: Hypothesis, trial: int) -> np.random.Generator:
        key = np.random.SeedSequence([self.seed, self.stream_id, Hypothesis(hypothesis).code, int(trial)])
        return np.random.Generator(np.random.Philox(key))

    def run_generator(self) -> np.random.Generator:
        """Draws made once per run (a random spike direction, for instance)."""
        # the trailing 2 keeps it apart from both hypotheses' trial keys
        key = np.random.SeedSequence([self.seed, self.stream_id, 2])
        return np.random.Generator(np.random.Philox(key))
