"""
Extended-precision evaluation of the spiked formulas

WHAT THIS FILE DOES:
- Recomputes the two terms of the spiked c.d.f., the p = m closed form and the
  g factor of the spiked density with mpmath
- Measures the digits cancelled in every sum and determinant along the way
  and raises the working precision until GUARD_DIGITS of them survive
- Gives up with NumericalInstabilityError above MAX_DPS

distributions.py and densities.py only come here when their double precision
terms cancel more than they can afford. Every factorial ratio is formed as an
exact Fraction before it meets a floating-point number.

Each thread gets its own mpmath context; the global mpmath.mp precision is
never touched, so the c.d.f.s stay safe to call from a thread pool.
"""

import logging
import math
import threading
from fractions import Fraction

from mpmath.ctx_mp import MPContext

from special_functions.exceptions import NumericalInstabilityError
from special_functions.logscaled import ZERO, LogScaled

logger = logging.getLogger(__name__)

GUARD_DIGITS = 20
START_DIGITS = 15
MAX_DPS = 600

_local = threading.local()
fact = math.factorial


def _context(dps: int) -> MPContext:
    ctx = getattr(_local, 'ctx', None)
    if ctx is None:
        ctx = _local.ctx = MPContext()
    ctx.dps = dps
    return ctx


def _rising(a: int, k: int) -> int:
    return math.prod(range(a, a + k))


class Cancellation:
    """
    Digits lost during one evaluation

    inner       -- worst sum feeding an entry or a coefficient
    determinant -- worst determinant, against the Hadamard bound of its columns
    outer       -- the final combination of the two terms
    """

    def __init__(self, ctx):
        self.ctx = ctx
        self.inner = 0.0
        self.determinant = 0.0
        self.outer = 0.0

    @property
    def total(self) -> float:
        return self.inner + self.determinant + self.outer

    def exact(self, value: Fraction):
        return self.ctx.mpf(value.numerator) / value.denominator

    def lost(self, largest, total) -> float:
        if not largest:
            return 0.0
        if not total:
            return math.inf
        return max(0.0, float(self.ctx.log10(largest / abs(total))))

    def sum(self, terms, outer=False):
        terms = list(terms)
        total = self.ctx.fsum(terms)
        digits = self.lost(max((abs(t) for t in terms), default=self.ctx.zero), total)
        if outer:
            self.outer = max(self.outer, digits)
        else:
            self.inner = max(self.inner, digits)
        return total

    def det(self, columns):
        ctx = self.ctx
        dim = len(columns)
        matrix = ctx.matrix(dim, dim)
        bound = ctx.one
        for j, column in enumerate(columns):
            for i, entry in enumerate(column):
                matrix[i, j] = entry
            bound *= ctx.sqrt(ctx.fsum(abs(entry) ** 2 for entry in column))
        value = matrix[0, 0] if dim == 1 else ctx.det(matrix)
        self.determinant = max(self.determinant, self.lost(bound, value))
        return value


def evaluate(build, *args, digits: float = 0.0, convert=None):
    """
    Runs build(ctx, track, *args) until the working precision covers the loss.

    `digits` is what the double-precision pass saw; it only sets the first
    working precision. The result goes through convert(ctx, value), float by
    default.
    """
    if not math.isfinite(digits):
        digits = 2 * START_DIGITS
    dps = GUARD_DIGITS + START_DIGITS + int(math.ceil(digits))
    while dps <= MAX_DPS:
        ctx = _context(dps)
        track = Cancellation(ctx)
        value = build(ctx, track, *args)
        if track.total + GUARD_DIGITS <= dps:
            logger.debug('%s at %d digits: %.1f digits cancelled', build.__name__, dps, track.total)
            return float(value) if convert is None else convert(ctx, value)
        if not math.isfinite(track.total):
            break
        dps = max(2 * dps, int(math.ceil(track.total)) + GUARD_DIGITS + 10)
    raise NumericalInstabilityError(
        f'{build.__name__}{args[:1]}: cancellation not resolved within {MAX_DPS} digits'
    )


# ==================== ENTRIES ====================

def _jacobi(track, degree, a, b, z):
    """P_degree^(a,b)(1 - 2z) for integer a, b as its terminating series in z."""
    ctx = track.ctx
    terms = []
    coef = Fraction(1)
    power = ctx.one
    for ell in range(degree + 1):
        terms.append(track.exact(coef) * power)
        coef *= Fraction((ell - degree) * (degree + a + b + 1 + ell), (a + 1 + ell) * (ell + 1))
        power *= z
    return track.exact(Fraction(_rising(a + 1, degree), fact(degree))) * track.sum(terms)


def _psi(track, i, j, z, cfg):
    degree = cfg.n + i - j
    if degree < 0:
        return track.ctx.zero
    return _rising(cfg.m + i - 1, j - 2) * _jacobi(track, degree, j - 2, cfg.beta + j - 2, z)


def _phi(track, i, cy, cfg):
    m, n, alpha = cfg.m, cfg.n, cfg.alpha
    return track.sum(
        track.exact(Fraction(fact(m + alpha - k - 1) * fact(n + k + i - 2), fact(k) * fact(m + i - k - 2)))
        * cy ** (-k)
        for k in range(cfg.beta)
    )


def _omega(track, i, w, cfg):
    """Omega_i with every 2F1 through its Euler transform; w is the 2F1 argument."""
    m, n, alpha = cfg.m, cfg.n, cfg.alpha
    top = n + i - 2
    terms = []
    for k in range(top + 1):
        order = n + alpha - k - 1
        series = track.sum(
            track.exact(Fraction(_rising(-order, ell), _rising(k + 2, ell))) * w ** ell
            for ell in range(order + 1)
        )
        coef = Fraction((-1) ** k * fact(m + i + k - 2), fact(top - k) * fact(k) * fact(k + 1))
        terms.append(track.exact(coef) * series)
    euler = (1 - w) ** (-(n + alpha))
    return track.exact(Fraction(fact(top), fact(m + i - 2))) * euler * track.sum(terms)


# ==================== C.D.F. TERMS ====================

def spiked_cdf(ctx, track, x, cfg):
    m, n, alpha = cfg.m, cfg.n, cfg.alpha
    x, eta = ctx.mpf(x), ctx.mpf(cfg.eta)
    y = x / (1 + x)
    c = eta / (1 + eta)
    one_minus_cy = (1 + eta / (1 + x)) / (1 + eta)

    rows = range(1, alpha + 2)
    psi_columns = [[_psi(track, i, j, -1 / x, cfg) for i in rows] for j in range(2, alpha + 2)]
    omega_column = [_omega(track, i, -x * eta / (1 + x + eta), cfg) for i in rows]
    phi_column = [(-1) ** (i - 1) * _phi(track, i, c * y, cfg) for i in rows]

    k_alpha = Fraction(1, fact(n - 1))
    for j in range(1, alpha + 1):
        k_alpha *= Fraction(fact(m + n + j - 2), fact(m + n + 2 * j - 2))
    const = track.exact(k_alpha) / (1 + eta) ** n

    first = (
        const * fact(n + alpha) * y ** (n * (alpha + m) - m + 1)
        / (c ** (m - 1) * one_minus_cy ** (n + alpha + 1))
        * track.det([omega_column] + psi_columns)
    )
    second = (-1) ** n * const * c ** (-n) * y ** (n * (m + alpha - 1)) * track.det([phi_column] + psi_columns)
    return track.sum([first, second], outer=True)


def alpha0_cdf(ctx, track, x, m, n, eta):
    x, eta = ctx.mpf(x), ctx.mpf(eta)
    w = eta * x / (1 + eta + x)
    c = eta / (1 + eta)

    outer = []
    for k in range(n):
        top = n - k - 1
        inner = track.sum(
            track.exact(Fraction(fact(top) * fact(k + 1), fact(top - ell) * fact(k + ell + 1))) * w ** ell
            for ell in range(top + 1)
        )
        coef = Fraction((-1) ** k * fact(m + k - 1), fact(k) * fact(k + 1) * fact(top))
        outer.append(track.exact(coef) * inner)

    first = (
        fact(n) * (1 + eta) ** m * x ** (m * (n - 1) + 1)
        / (fact(m - 1) * eta ** (m - 1) * (1 + x) ** (m * n - m - n) * (1 + eta + x) ** (n + 1))
        * ((1 + eta + x) / ((1 + eta) * (1 + x))) ** n
        * track.sum(outer)
    )
    y = x / (1 + x)
    tail = track.sum(
        track.exact(Fraction(fact(n + k - 1), fact(k))) * c ** (-k) * y ** (n * (m - 1) - k)
        for k in range(m - n)
    )
    second = (-1) ** n / (fact(n - 1) * eta ** n) * tail
    return track.sum([first, second], outer=True)


# ==================== DENSITY ====================

def density_g(ctx, track, lambdas, cfg):
    """g(y_1, ..., y_n) of the spiked joint density, signed."""
    m, n, p, alpha, beta = cfg.m, cfg.n, cfg.p, cfg.alpha, cfg.beta
    eta = ctx.mpf(cfg.eta)
    c = eta / (1 + eta)
    lams = [ctx.mpf(v) for v in lambdas]
    ys = [lam / (1 + lam) for lam in lams]

    terms = []
    for k in range(n):
        den = ctx.one
        for ell in range(n):
            if ell != k:
                den *= ys[k] - ys[ell]
        one_minus_cy = (1 + eta / (1 + lams[k])) / (1 + eta)
        terms.append(
            fact(n + alpha) * c ** (-(m - 1)) * ys[k] ** (-beta) * one_minus_cy ** (-(n + alpha + 1)) / den
        )
        for j in range(beta):
            terms.append(
                -track.exact(Fraction(fact(p - j - 1), fact(beta - j - 1)))
                * c ** (-(n + j)) * ys[k] ** (-(j + 1)) / den
            )
    return track.sum(terms, outer=True)


def cdf_spiked_precise(x: float, cfg, digits: float = 0.0) -> float:
    return evaluate(spiked_cdf, x, cfg, digits=digits)


def cdf_alpha0_precise(x: float, m: int, n: int, eta: float, digits: float = 0.0) -> float:
    return evaluate(alpha0_cdf, x, m, n, eta, digits=digits)


def _log_scaled(ctx, value) -> LogScaled:
    if not value:
        return ZERO
    return LogScaled(1 if value > 0 else -1, float(ctx.log(abs(value))))


def density_g_precise(lambdas, cfg, digits: float = 0.0) -> LogScaled:
    return evaluate(density_g, list(lambdas), cfg, digits=digits, convert=_log_scaled)
