"""
Matrix coercion and checks.

Complex matrices are numpy arrays of shape (..., m, m); the leading axes, when
present, stack independent problems (one per Monte Carlo trial). Real
determinant matrices are plain (d, d) float arrays.
"""

import numpy as np

from special_functions.exceptions import InvalidParameterError

MAX_DIMENSION = 512
HERMITIAN_TOLERANCE = 1e-10


def as_square(a, dtype=complex, max_dim=MAX_DIMENSION) -> np.ndarray:
    a = np.asarray(a, dtype=dtype)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] == 0:
        raise InvalidParameterError(f'expected square matrices, got shape {a.shape}')
    if a.shape[-1] > max_dim:
        raise InvalidParameterError(f'dimension {a.shape[-1]} above {max_dim}')
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError('matrix has non-finite entries')
    return a


def conj_t(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def max_abs(a: np.ndarray) -> np.ndarray:
    """Largest entry magnitude of each stacked matrix."""
    return np.max(np.abs(a), axis=(-2, -1))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + conj_t(a)) / 2


def check_hermitian(a: np.ndarray, tolerance=HERMITIAN_TOLERANCE) -> np.ndarray:
    """Symmetrized copy of `a`; rejects inputs that are not Hermitian to begin with."""
    scale = np.maximum(max_abs(a), np.finfo(float).tiny)
    skew = max_abs(a - conj_t(a))
    if np.any(skew > tolerance * scale):
        raise InvalidParameterError(
            f'matrix is not Hermitian (skew {float(np.max(skew / scale)):.3g} of its max entry)'
        )
    return hermitian_part(a)
