"""
One-factor quadrature for orthant probabilities under exchangeable correlation.

With rho >= 0 the components factor as T_k = (sqrt(rho) Z0 + sqrt(1 - rho) Z_k) / S
with S = sqrt(chi2_d / d), so conditional on (Z0, S) the events are independent.
Z0 is integrated by Gauss-Hermite and log(chi2_d) by Gauss-Legendre on a
standardized, truncated range; both rules are doubled until successive
estimates agree.
"""

import math
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr, polygamma, psi

from supnoninf.core import AccuracyNotReachedError, get_logger, settings
from supnoninf.mvt.base import ProbEstimate
from supnoninf.mvt.univariate import t_tail

logger = get_logger(__name__)

RHO_ONE_TOLERANCE = 1e-12


@lru_cache(maxsize=16)
def _hermite_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = hermegauss(n)
    return nodes, weights / math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=16)
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


@lru_cache(maxsize=256)
def _scale_rule(d: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes S = sqrt(chi2_d / d) with normalized weights."""
    if math.isinf(d):
        return np.ones(1), np.ones(1)
    half = d / 2.0
    mu = math.log(2.0) + float(psi(half))
    sigma = math.sqrt(float(polygamma(1, half)))
    left = max(10.0, 90.0 / (d * sigma))
    right = 12.0

    x, w = _legendre_rule(n)
    y = 0.5 * (right + left) * x + 0.5 * (right - left)
    log_chisq = mu + sigma * y
    log_density = half * log_chisq - 0.5 * np.exp(log_chisq)
    weights = w * np.exp(log_density - log_density.max())
    weights /= weights.sum()
    return np.exp(0.5 * log_chisq) / math.sqrt(d), weights


def _integrate(bounds: np.ndarray, rho: float, d: float, n_scale: int, n_factor: int) -> float:
    scale, w_scale = _scale_rule(d, n_scale)
    if rho > 0.0:
        z, w_z = _hermite_rule(n_factor)
    else:
        z, w_z = np.zeros(1), np.ones(1)
    arg = (
        bounds[:, None, None] * scale[None, :, None] - math.sqrt(rho) * z[None, None, :]
    ) / math.sqrt(1.0 - rho)
    conditional = ndtr(-arg).prod(axis=0)
    return float(w_scale @ conditional @ w_z)


def exchangeable_orthant_prob(
    bounds: np.ndarray,
    rho: float,
    d: float,
    abs_err: Optional[float] = None,
    max_nodes: Optional[int] = None,
) -> ProbEstimate:
    """
    P(T_k > bounds[k] for all k) for exchangeable correlation ``rho`` in [0, 1].

    Args:
        bounds: Lower bounds, +/-inf allowed
        rho: Common correlation (must be >= 0)
        d: Degrees of freedom (inf for the normal case)
        abs_err: Requested absolute error
        max_nodes: Cap on either rule's node count

    Returns:
        ProbEstimate with method "quadrature" or "closed_form"

    Raises:
        AccuracyNotReachedError: If the rules stop agreeing before ``max_nodes``
    """
    tol = abs_err if abs_err is not None else settings.exch_abs_err
    cap = max_nodes if max_nodes is not None else settings.exch_max_nodes

    b = np.asarray(bounds, dtype=np.float64)
    if np.any(np.isposinf(b)):
        return ProbEstimate(0.0, 0.0, "closed_form")
    b = b[~np.isneginf(b)]
    if b.size == 0:
        return ProbEstimate(1.0, 0.0, "closed_form")
    if b.size == 1 or rho >= 1.0 - RHO_ONE_TOLERANCE:
        return ProbEstimate(t_tail(float(b.max()), d), 0.0, "closed_form")

    n_scale = 1 if math.isinf(d) else 64
    n_factor = 32 if rho > 0.0 else 1
    if n_scale == 1 and n_factor == 1:
        return ProbEstimate(_integrate(b, rho, d, 1, 1), 0.0, "closed_form")

    previous = _integrate(b, rho, d, n_scale, n_factor)
    while True:
        if n_scale > 1:
            n_scale *= 2
        if n_factor > 1:
            n_factor *= 2
        current = _integrate(b, rho, d, n_scale, n_factor)
        error = abs(current - previous)
        if error <= tol:
            return ProbEstimate(
                current,
                error,
                "quadrature",
                details={"scale_nodes": n_scale, "factor_nodes": n_factor},
            )
        if max(n_scale, n_factor) >= cap:
            raise AccuracyNotReachedError(
                "one-factor quadrature did not settle",
                best_estimate=ProbEstimate(current, error, "quadrature"),
                details={"rho": rho, "d": d, "nodes": max(n_scale, n_factor)},
            )
        logger.debug("Refining one-factor rule", nodes=max(n_scale, n_factor), error=error)
        previous = current
