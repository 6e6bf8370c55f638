"""
False alarm, detection and threshold inversion

WHAT THIS FILE DOES:
- p_false_alarm(lambda_th):  1 - F(kappa * lambda_th; 0)
- p_detect(gamma, lambda_th): 1 - F(kappa * lambda_th; gamma)
- threshold_for_pfa(alpha):  inverts p_false_alarm by bracketing + bisection
- roc_exact:                 pf grid -> thresholds -> pd, one point at a time
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import bisect

from cdf_exact.config import Probability
from cdf_exact.distributions import cdf_max_null, cdf_max_spiked
from special_functions.exceptions import ConvergenceError, InvalidParameterError

from .types import DetectorConfig, Provenance, RocPoint

logger = logging.getLogger(__name__)

PFA_TOLERANCE = 1e-10
MAX_BISECTIONS = 200
MAX_BRACKET_DOUBLINGS = 200


def _check_threshold(lambda_th) -> float:
    lambda_th = float(lambda_th)
    if math.isnan(lambda_th) or lambda_th < 0:
        raise InvalidParameterError(f'threshold must be nonnegative, got {lambda_th!r}')
    return lambda_th


def p_false_alarm(lambda_th, cfg: DetectorConfig) -> Probability:
    lambda_th = _check_threshold(lambda_th)
    return Probability(1.0 - cdf_max_null(cfg.kappa * lambda_th, cfg.null))


def p_detect(gamma, lambda_th, cfg: DetectorConfig) -> Probability:
    if not float(gamma) > 0:
        raise InvalidParameterError(f'gamma must be positive, got {gamma!r}')
    lambda_th = _check_threshold(lambda_th)
    return Probability(1.0 - cdf_max_spiked(cfg.kappa * lambda_th, cfg.spiked(gamma)))


def threshold_for_pfa(alpha_target, cfg: DetectorConfig) -> float:
    """Threshold lambda_th with p_false_alarm(lambda_th) = alpha_target to within 1e-10."""
    alpha_target = float(alpha_target)
    if not 0.0 < alpha_target < 1.0:
        raise InvalidParameterError(f'target false alarm rate must lie in (0, 1), got {alpha_target!r}')

    def excess(lam):
        return float(p_false_alarm(lam, cfg)) - alpha_target

    # p_false_alarm(0) = 1 > alpha, so only the upper end needs growing
    lo, hi = 0.0, 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if excess(hi) <= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError(f'no threshold bracket found for pf={alpha_target}')

    try:
        lam, result = bisect(
            excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
            maxiter=MAX_BISECTIONS, full_output=True, disp=False,
        )
    except ValueError as exc:
        raise ConvergenceError(f'bisection failed for pf={alpha_target}: {exc}') from exc
    logger.debug('pf=%g: threshold %.17g after %d bisections', alpha_target, lam, result.iterations)

    gap = abs(excess(lam))
    if not result.converged or gap > PFA_TOLERANCE:
        raise ConvergenceError(
            f'threshold for pf={alpha_target} only reached |pf error|={gap:.3g} '
            f'after {result.iterations} bisections'
        )
    return lam


def _exact_point(gamma, pf, cfg: DetectorConfig) -> RocPoint:
    lam = threshold_for_pfa(pf, cfg)
    return RocPoint(pf=pf, pd=p_detect(gamma, lam, cfg), provenance=Provenance.EXACT)


def roc_exact(gamma, cfg: DetectorConfig, pf_grid, workers: int = 1):
    pf_grid = [float(pf) for pf in pf_grid]
    for pf in pf_grid:
        if not 0.0 < pf < 1.0:
            raise InvalidParameterError(f'pf grid values must lie in (0, 1), got {pf!r}')
    if workers <= 1:
        return [_exact_point(gamma, pf, cfg) for pf in pf_grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda pf: _exact_point(gamma, pf, cfg), pf_grid))
