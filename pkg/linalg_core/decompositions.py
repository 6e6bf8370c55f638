"""
Factorizations used by the Monte Carlo oracle and the c.d.f. determinants

WHAT THIS FILE DOES:
- cholesky_hermitian: b = L L^H with an explicit pivot test
- eigvals_hermitian: ascending real eigenvalues
- max_generalized_eig: largest root of det(a - lambda b) = 0, reduced to the
  standard problem L^-1 a L^-H
- logdet_lu / logdet_scaled: sign and log-magnitude of a determinant, the
  latter for matrices whose entries are LogScaled

LAPACK does the work (through numpy and scipy). Every function also accepts a
stack of matrices of shape (..., m, m).
"""

import logging
import math

import numpy as np
from scipy.linalg import solve_triangular

from special_functions.exceptions import ConvergenceError, InvalidParameterError, NotPositiveDefiniteError
from special_functions.logscaled import ONE, ZERO, LogScaled

from .matrices import as_square, check_hermitian, conj_t, hermitian_part, max_abs

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def cholesky_hermitian(a) -> np.ndarray:
    """Lower-triangular L with L L^H = a for Hermitian positive definite a."""
    a = check_hermitian(as_square(a))
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f'Cholesky failed: {exc}') from exc

    # numpy only fails on pivots <= 0; anything this small is singular too
    dim = a.shape[-1]
    pivots = np.abs(np.diagonal(lower, axis1=-2, axis2=-1)) ** 2
    floor = dim * _EPS * max_abs(a)
    if np.any(pivots <= floor[..., np.newaxis]):
        raise NotPositiveDefiniteError(
            'matrix is numerically singular (noise sample covariance with p < m or a degenerate draw)'
        )
    return lower


def eigvals_hermitian(a) -> np.ndarray:
    a = check_hermitian(as_square(a))
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f'Hermitian eigenvalue iteration did not converge: {exc}') from exc


def _whiten(a: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """L^-1 a L^-H for Hermitian a."""
    if a.ndim == 2:
        left = solve_triangular(lower, a, lower=True)
        return solve_triangular(lower, conj_t(left), lower=True)
    left = np.linalg.solve(lower, a)
    return np.linalg.solve(lower, conj_t(left))


def max_generalized_eig(a, b):
    """
    Largest eigenvalue of b^-1 a for Hermitian PSD a and Hermitian PD b.

    a is symmetrized before use: sample covariances built from outer
    products carry rounding skew.
    """
    a = hermitian_part(as_square(a))
    b = as_square(b)
    if a.shape != b.shape:
        raise InvalidParameterError(f'shape mismatch {a.shape} vs {b.shape}')
    lower = cholesky_hermitian(b)
    whitened = hermitian_part(_whiten(a, lower))
    try:
        top = np.linalg.eigvalsh(whitened)[..., -1]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f'Hermitian eigenvalue iteration did not converge: {exc}') from exc
    return float(top) if top.ndim == 0 else top


def logdet_lu(m) -> LogScaled:
    """Sign and log|det| through LU with partial pivoting; singular input gives zero."""
    m = as_square(m, dtype=float)
    if m.ndim != 2:
        raise InvalidParameterError('logdet_lu takes a single matrix')
    sign, logabs = np.linalg.slogdet(m)
    if sign == 0 or not np.isfinite(logabs):
        return ZERO
    return LogScaled(int(sign), float(logabs))


def logdet_scaled(columns) -> LogScaled:
    """
    Determinant of a matrix given column by column as LogScaled entries.

    Each column is divided by its largest magnitude before the LU step and
    the scales are multiplied back afterwards, so entries spanning hundreds
    of orders of magnitude stay representable.
    """
    columns = [list(column) for column in columns]
    dim = len(columns)
    if dim == 0:
        return ONE
    if any(len(column) != dim for column in columns):
        raise InvalidParameterError('determinant needs a square matrix')

    scales = []
    matrix = np.zeros((dim, dim))
    for j, column in enumerate(columns):
        shift = max((entry.log_mag for entry in column if entry.sign != 0), default=None)
        if shift is None:
            return ZERO
        scales.append(shift)
        for i, entry in enumerate(column):
            if entry.sign != 0:
                matrix[i, j] = entry.sign * np.exp(entry.log_mag - shift)

    logger.debug('determinant of order %d, column scales %s', dim, scales)
    return logdet_lu(matrix) * LogScaled(1, float(sum(scales)))


def determinant_digits(columns, det: LogScaled) -> float:
    """
    Decimal digits between the Hadamard bound (product of the column norms)
    and |det|. LU loses about this many digits to rounding.
    """
    bound = 0.0
    for column in columns:
        logs = np.array([entry.log_mag for entry in column if entry.sign != 0])
        if logs.size == 0:
            return 0.0
        shift = float(logs.max())
        bound += shift + 0.5 * math.log(math.fsum(np.exp(2.0 * (logs - shift)).tolist()))
    if det.sign == 0:
        return math.inf
    return max(0.0, (bound - det.log_mag) / math.log(10.0))
