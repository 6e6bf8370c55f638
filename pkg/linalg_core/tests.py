import math

import mpmath
import numpy as np
from django.test import SimpleTestCase
from scipy.linalg import eigh

from linalg_core.decompositions import (
    cholesky_hermitian,
    determinant_digits,
    eigvals_hermitian,
    logdet_lu,
    logdet_scaled,
    max_generalized_eig,
)
from linalg_core.matrices import conj_t
from special_functions.exceptions import InvalidParameterError, NotPositiveDefiniteError
from special_functions.logscaled import ZERO, LogScaled


def random_complex(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def random_hermitian(rng, dim):
    g = random_complex(rng, dim)
    return (g + conj_t(g)) / 2


def random_pd(rng, dim):
    g = random_complex(rng, dim)
    return g @ conj_t(g) + np.eye(dim)


# ==================== CHOLESKY ====================

class CholeskyTests(SimpleTestCase):

    def test_identity(self):
        np.testing.assert_allclose(cholesky_hermitian(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(cholesky_hermitian(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        a = random_pd(rng, 6)
        lower = cholesky_hermitian(a)
        self.assertTrue(np.allclose(np.triu(lower, 1), 0))
        self.assertLessEqual(np.max(np.abs(lower @ conj_t(lower) - a)), 1e-10 * np.max(np.abs(a)))

    def test_stacked_input(self):
        rng = np.random.default_rng(8)
        stack = np.stack([random_pd(rng, 3) for _ in range(4)])
        lower = cholesky_hermitian(stack)
        self.assertEqual(lower.shape, (4, 3, 3))
        np.testing.assert_allclose(lower @ conj_t(lower), stack, atol=1e-12)

    def test_indefinite_rejected(self):
        with self.assertRaises(NotPositiveDefiniteError):
            cholesky_hermitian(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_tiny_pivot_rejected(self):
        with self.assertRaises(NotPositiveDefiniteError):
            cholesky_hermitian(np.diag([1.0, 1e-17]))
        with self.assertRaises(NotPositiveDefiniteError):
            cholesky_hermitian(np.ones((2, 2)))

    def test_non_hermitian_rejected(self):
        with self.assertRaises(InvalidParameterError):
            cholesky_hermitian(np.array([[2.0, 1.0], [0.0, 2.0]]))


# ==================== EIGENVALUES ====================

class HermitianEigenvalueTests(SimpleTestCase):

    def test_diagonal_sorted(self):
        np.testing.assert_allclose(eigvals_hermitian(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_pauli(self):
        np.testing.assert_allclose(eigvals_hermitian(np.array([[0, 1j], [-1j, 0]])), [-1.0, 1.0], atol=1e-15)

    def test_characteristic_polynomial_roots(self):
        rng = np.random.default_rng(11)
        a = random_hermitian(rng, 5)
        roots = np.sort(np.roots(np.poly(a)).real)
        np.testing.assert_allclose(eigvals_hermitian(a), roots, atol=1e-9)

    def test_trace_preserved(self):
        rng = np.random.default_rng(12)
        for dim in (2, 8, 31, 64):
            a = random_hermitian(rng, dim)
            total = np.sum(eigvals_hermitian(a))
            self.assertLessEqual(abs(total - np.trace(a).real), 1e-10 * np.linalg.norm(a))


# ==================== GENERALIZED ====================

class GeneralizedEigenvalueTests(SimpleTestCase):

    def test_scaled_identity(self):
        self.assertAlmostEqual(max_generalized_eig(2 * np.eye(3), np.eye(3)), 2.0, places=13)

    def test_diagonal(self):
        self.assertAlmostEqual(max_generalized_eig(np.diag([1.0, 5.0, 3.0]), np.eye(3)), 5.0, places=13)

    def test_against_lapack_pencil(self):
        rng = np.random.default_rng(13)
        g = random_complex(rng, 6, 3)
        a = g @ conj_t(g)
        b = random_pd(rng, 6)
        expected = eigh(a, b, eigvals_only=True)[-1]
        self.assertLess(abs(max_generalized_eig(a, b) - expected) / expected, 1e-8)

    def test_congruence_invariance(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            g = random_complex(rng, 5, 2)
            a, b = g @ conj_t(g), random_pd(rng, 5)
            c = random_complex(rng, 5) + 2 * np.eye(5)
            before = max_generalized_eig(a, b)
            after = max_generalized_eig(c @ a @ conj_t(c), c @ b @ conj_t(c))
            self.assertLess(abs(after - before) / before, 1e-8)

    def test_stacked_matches_single(self):
        rng = np.random.default_rng(15)
        pairs = [(random_pd(rng, 4) - np.eye(4), random_pd(rng, 4)) for _ in range(3)]
        stacked = max_generalized_eig(np.stack([a for a, _ in pairs]), np.stack([b for _, b in pairs]))
        for value, (a, b) in zip(stacked, pairs):
            self.assertAlmostEqual(value, max_generalized_eig(a, b), places=10)

    def test_singular_b_propagates(self):
        with self.assertRaises(NotPositiveDefiniteError):
            max_generalized_eig(np.eye(2), np.diag([1.0, 0.0]))


# ==================== DETERMINANTS ====================

class LogDeterminantTests(SimpleTestCase):

    def test_identity(self):
        self.assertEqual(logdet_lu(np.eye(3)), LogScaled(1, 0.0))

    def test_negative_determinant(self):
        result = logdet_lu(np.array([[2.0, 0.0], [0.0, -3.0]]))
        self.assertEqual(result.sign, -1)
        self.assertAlmostEqual(result.log_mag, math.log(6.0), places=14)

    def test_cofactor_oracle(self):
        rng = np.random.default_rng(21)
        m = rng.uniform(-1, 1, (5, 5))
        mpmath.mp.dps = 40
        exact = mpmath.det(mpmath.matrix(m.tolist()))
        value = logdet_lu(m).to_float()
        self.assertLess(abs(value - float(exact)) / abs(float(exact)), 1e-12)

    def test_multiplicative(self):
        rng = np.random.default_rng(22)
        m1, m2 = rng.uniform(-1, 1, (4, 4)), rng.uniform(-1, 1, (4, 4))
        product = logdet_lu(m1 @ m2)
        expected = logdet_lu(m1) * logdet_lu(m2)
        self.assertEqual(product.sign, expected.sign)
        self.assertLess(abs(product.log_mag - expected.log_mag), 1e-10)

    def test_singular(self):
        self.assertEqual(logdet_lu(np.array([[1.0, 2.0], [2.0, 4.0]])), ZERO)

    def test_scaled_columns(self):
        # det [[1e300, 2e-300], [3e300, 4e-300]] = (4 - 6) = -2
        columns = [
            [LogScaled.from_float(1.0) * LogScaled(1, 300 * math.log(10)),
             LogScaled.from_float(3.0) * LogScaled(1, 300 * math.log(10))],
            [LogScaled.from_float(2.0) / LogScaled(1, 300 * math.log(10)),
             LogScaled.from_float(4.0) / LogScaled(1, 300 * math.log(10))],
        ]
        result = logdet_scaled(columns)
        self.assertEqual(result.sign, -1)
        self.assertAlmostEqual(result.to_float(), -2.0, places=12)

    def test_empty_and_zero_column(self):
        self.assertEqual(logdet_scaled([]).to_float(), 1.0)
        self.assertEqual(logdet_scaled([[ZERO, ZERO], [LogScaled.from_float(1.0), ZERO]]), ZERO)

    def test_determinant_digits(self):
        def as_columns(matrix):
            return [[LogScaled.from_float(v) for v in column] for column in np.asarray(matrix).T]

        orthogonal = as_columns([[3.0, 0.0], [0.0, 5.0]])
        self.assertAlmostEqual(determinant_digits(orthogonal, logdet_scaled(orthogonal)), 0.0, places=12)
        # columns (1, 1) and (1, 1 + 1e-8): |det| = 1e-8, norms multiply to about 2
        nearly = as_columns([[1.0, 1.0], [1.0, 1.0 + 1e-8]])
        digits = determinant_digits(nearly, logdet_scaled(nearly))
        self.assertAlmostEqual(digits, math.log10(2e8), delta=1e-3)
        singular = as_columns([[1.0, 2.0], [2.0, 4.0]])
        self.assertEqual(determinant_digits(singular, ZERO), math.inf)
        self.assertEqual(determinant_digits([[ZERO, ZERO], [LogScaled.from_float(1.0), ZERO]], ZERO), 0.0)
