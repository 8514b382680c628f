"""Entry points of the multivariate t kernel."""

import itertools
import math
from typing import Optional, Sequence

import numpy as np

from supnoninf.core import AccuracyNotReachedError, InvalidParameterError, get_logger
from supnoninf.montecarlo import RateEstimate, count_in_blocks
from supnoninf.mvt.base import CorrelationMatrix, ProbEstimate, Rectangle
from supnoninf.mvt.exchangeable import exchangeable_orthant_prob
from supnoninf.mvt.lattice import lattice_rect_prob
from supnoninf.mvt.univariate import check_df, t_tail

logger = get_logger(__name__)

# Inclusion-exclusion over 2^m orthants is used up to this dimension.
MAX_ORTHANT_EXPANSION_DIM = 8


def mvt_rect_prob(
    rect: Rectangle,
    R: CorrelationMatrix,
    d: float,
    target_abs_err: Optional[float] = None,
    seed: Optional[int] = None,
) -> ProbEstimate:
    """
    P(lower < T < upper) for a central m-variate t with correlation R.

    Coordinates unbounded on both sides are marginalized out first; one
    remaining coordinate is handled in closed form, more by the lattice rule.

    Args:
        rect: Integration rectangle
        R: Correlation matrix of matching dimension
        d: Degrees of freedom (inf for the normal case)
        target_abs_err: Requested absolute error (settings default when None)
        seed: Integration seed (settings default when None)

    Returns:
        ProbEstimate
    """
    check_df(d)
    if rect.dim != R.dim:
        raise InvalidParameterError(
            "rectangle and correlation dimensions differ",
            details={"rect": rect.dim, "R": R.dim},
        )
    if target_abs_err is not None and not target_abs_err > 0:
        raise InvalidParameterError("target_abs_err must be positive")

    if np.any(rect.lower == rect.upper):
        return ProbEstimate(0.0, 0.0, "closed_form")
    active = ~(np.isneginf(rect.lower) & np.isposinf(rect.upper))
    if not np.any(active):
        return ProbEstimate(1.0, 0.0, "closed_form")

    index = np.flatnonzero(active)
    lower = rect.lower[index]
    upper = rect.upper[index]
    if index.size == 1:
        value = t_tail(float(lower[0]), d) - t_tail(float(upper[0]), d)
        return ProbEstimate(value, 0.0, "closed_form")

    sub = R if index.size == R.dim else R.submatrix(index)
    return lattice_rect_prob(lower, upper, sub, d, target_abs_err=target_abs_err, seed=seed)


def mvt_exch_tail_prob(bounds: Sequence[float], rho: float, d: float) -> ProbEstimate:
    """
    P(T_k > bounds[k] for all k) under exchangeable correlation ``rho``.

    Negative ``rho`` has no one-factor form and is integrated by the lattice
    rule; the fallback is recorded in ``details``.
    """
    check_df(d)
    b = np.asarray(bounds, dtype=np.float64)
    m = b.size
    if m == 0:
        raise InvalidParameterError("bounds must not be empty")
    R = CorrelationMatrix.exchangeable(m, rho)
    if rho < 0.0 and m > 1:
        estimate = mvt_rect_prob(Rectangle.upper_orthant(b), R, d)
        return ProbEstimate(
            estimate.value,
            estimate.abs_error,
            estimate.method,
            details={**estimate.details, "fallback": "negative_rho"},
        )
    return _exchangeable_or_lattice(b, R, float(rho), d)


def _exchangeable_or_lattice(
    b: np.ndarray, R: CorrelationMatrix, rho: float, d: float
) -> ProbEstimate:
    try:
        return exchangeable_orthant_prob(b, rho, d)
    except AccuracyNotReachedError as exc:
        logger.warning("One-factor rule unsettled, using lattice rule", rho=rho, d=d)
        estimate = mvt_rect_prob(Rectangle.upper_orthant(b), R, d)
        return ProbEstimate(
            estimate.value,
            estimate.abs_error,
            estimate.method,
            details={**estimate.details, "fallback": exc.code},
        )


def upper_orthant_prob(
    bounds: Sequence[float],
    R: CorrelationMatrix,
    d: float,
    target_abs_err: Optional[float] = None,
    seed: Optional[int] = None,
) -> ProbEstimate:
    """P(T_k > bounds[k] for all k), deterministic whenever R is exchangeable with rho >= 0."""
    b = np.asarray(bounds, dtype=np.float64)
    if b.size != R.dim:
        raise InvalidParameterError(
            "bounds and correlation dimensions differ",
            details={"bounds": int(b.size), "R": R.dim},
        )
    rho = R.exchangeable_rho()
    if rho is not None and rho >= 0.0:
        return _exchangeable_or_lattice(b, R, rho, d)
    return mvt_rect_prob(Rectangle.upper_orthant(b), R, d, target_abs_err=target_abs_err, seed=seed)


def rect_prob_by_orthants(
    lower: Sequence[float], upper: Sequence[float], R: CorrelationMatrix, d: float
) -> ProbEstimate:
    """
    Rectangle probability as an inclusion-exclusion sum of upper-orthant terms.

    P(l < T <= u) = sum over subsets S of (-1)^|S| P(T_k > u_k for k in S,
    T_k > l_k otherwise). Subsets touching an infinite upper bound vanish.
    """
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    m = lo.size
    if m > MAX_ORTHANT_EXPANSION_DIM:
        raise InvalidParameterError(
            "orthant expansion limited to small dimensions", details={"m": m}
        )
    finite_upper = [k for k in range(m) if np.isfinite(hi[k])]
    value = 0.0
    error = 0.0
    methods = set()
    for size in range(len(finite_upper) + 1):
        for subset in itertools.combinations(finite_upper, size):
            bounds = lo.copy()
            bounds[list(subset)] = hi[list(subset)]
            term = upper_orthant_prob(bounds, R, d)
            value += (-1) ** size * term.value
            error += term.abs_error
            methods.add(term.method)
    method = "qmc" if "qmc" in methods else ("quadrature" if "quadrature" in methods else "closed_form")
    return ProbEstimate(value, error, method, details={"terms": 2 ** len(finite_upper)})


def rectangle_prob(
    lower: Sequence[float], upper: Sequence[float], R: CorrelationMatrix, d: float
) -> ProbEstimate:
    """Dispatch a rectangle to the orthant expansion or the lattice rule."""
    rho = R.exchangeable_rho()
    if rho is not None and rho >= 0.0 and R.dim <= MAX_ORTHANT_EXPANSION_DIM:
        return rect_prob_by_orthants(lower, upper, R, d)
    return mvt_rect_prob(Rectangle(np.asarray(lower), np.asarray(upper)), R, d)


def sample_mvt(n: int, R: CorrelationMatrix, d: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` central multivariate t vectors (rows)."""
    z = rng.standard_normal((n, R.dim)) @ R.factor().T
    if math.isinf(d):
        return z
    scale = np.sqrt(rng.chisquare(d, size=n) / d)
    return z / scale[:, None]


def mc_orthant_prob(
    lower: Sequence[float],
    upper: Sequence[float],
    R: CorrelationMatrix,
    d: float,
    draws: int,
    seed: int,
    threads: Optional[int] = None,
) -> RateEstimate:
    """Plain Monte Carlo estimate of P(lower < T < upper) with its standard error."""
    check_df(d)
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)

    def count(size: int, rng: np.random.Generator) -> int:
        t = sample_mvt(size, R, d, rng)
        return int(np.count_nonzero(np.all((t > lo) & (t < hi), axis=1)))

    return count_in_blocks(draws, seed, count, threads=threads)
