"""
One-sided likelihood-ratio test against the non-positive orthant, gated by
non-inferiority on every endpoint.
"""

import itertools
from typing import Optional

import numpy as np
from scipy import optimize, stats

from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.analysis.statistics import MarginSpec
from supnoninf.comparators.base import BaseComparator, ComparatorDecision, Method
from supnoninf.comparators.resampling import sample_moments
from supnoninf.core import ConvergenceError, InvalidParameterError, get_logger

logger = get_logger(__name__)

MAX_ENUMERATION_DIM = 8


def orthant_projection_distance(x: np.ndarray, cov: np.ndarray) -> float:
    """
    min over theta <= 0 of (x - theta)' cov^-1 (x - theta).

    Enumerates the set B of coordinates held at zero: the candidate value is
    x_B' cov_BB^-1 x_B and the free coordinates sit at
    x_F - cov_FB cov_BB^-1 x_B, which must be non-positive.
    """
    x = np.asarray(x, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    m = x.size
    if m > MAX_ENUMERATION_DIM:
        raise InvalidParameterError(
            "orthant projection by enumeration is limited to small dimensions",
            details={"m": m},
        )
    if np.all(x <= 0):
        return 0.0

    best = np.inf
    for size in range(1, m + 1):
        for held in itertools.combinations(range(m), size):
            B = list(held)
            F = [k for k in range(m) if k not in held]
            weights = np.linalg.solve(cov[np.ix_(B, B)], x[B])
            if F and np.any(x[F] - cov[np.ix_(F, B)] @ weights > 1e-12):
                continue
            best = min(best, float(x[B] @ weights))
    return best


def pw_mixture_tail(d2: float, m: int, n_total: int) -> float:
    """
    0.5 P(chi2_{m-1} / chi2_{N-m} > d2) + 0.5 P(chi2_m / chi2_{N-m-1} > d2).

    A chi-square ratio a/b exceeds d exactly when F(a, b) exceeds d * b / a.
    """
    def ratio_tail(num: int, den: int) -> float:
        if num == 0:
            return 0.0
        return float(stats.f.sf(d2 * den / num, num, den))

    return 0.5 * ratio_tail(m - 1, n_total - m) + 0.5 * ratio_tail(m, n_total - m - 1)


def pw_critical_value(m: int, n_total: int, alpha: float) -> float:
    """Solve pw_mixture_tail(d2) = alpha by bracketed root finding."""
    if n_total - m - 1 < 1:
        raise InvalidParameterError(
            "too few subjects for the orthant test", details={"m": m, "n_total": n_total}
        )
    if not 0.0 < alpha < (0.5 if m == 1 else 1.0):
        raise InvalidParameterError("alpha outside the attainable range", details={"alpha": alpha})

    def residual(d2: float) -> float:
        return pw_mixture_tail(d2, m, n_total) - alpha

    hi = 1.0
    trace = []
    while residual(hi) > 0:
        trace.append((hi, pw_mixture_tail(hi, m, n_total)))
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError(
                "could not bracket the orthant-test critical value",
                bracket=(0.0, hi),
                details={"trace": trace},
            )
    return float(optimize.brentq(residual, 0.0, hi, xtol=1e-14, rtol=1e-12))


class PWComparator(BaseComparator):
    """Reject when U^2 > d2 and min_k t_ni > t_{d,alpha}."""

    method = Method.PW

    def __init__(self, margins: MarginSpec, alpha: float = 0.05):
        super().__init__(margins, alpha)
        self._critical: dict[tuple, float] = {}

    def critical_value(self, m: int, n_total: int) -> float:
        key = (m, n_total)
        if key not in self._critical:
            self._critical[key] = pw_critical_value(m, n_total, self.alpha)
        return self._critical[key]

    def decide(self, data: TwoGroupSample, seed: Optional[int] = None) -> ComparatorDecision:
        self._check(data)
        if data.m > data.df:
            raise InvalidParameterError("more endpoints than error degrees of freedom")
        observed = sample_moments(data)
        _, t_ni = observed.t_stats(self.margins.epsilon, self.margins.eta)
        gate = self.gate_value(observed.df)

        x = observed.diff[0] - np.asarray(self.margins.epsilon)
        n_eff = data.n_trt * data.n_ctl / (data.n_trt + data.n_ctl)
        pooled = observed.pooled_cov()[0]
        u2 = n_eff * orthant_projection_distance(x, pooled) / observed.df
        d2 = self.critical_value(data.m, data.n_trt + data.n_ctl)

        min_ni = float(t_ni.min())
        return ComparatorDecision(
            method=self.method,
            reject_h0=bool(u2 > d2 and min_ni > gate),
            statistics={"u2": u2, "min_t_ni": min_ni},
            critical_values={"d2": d2, "gate": gate},
        )


def pw_test(data: TwoGroupSample, margins: MarginSpec, alpha: float = 0.05) -> ComparatorDecision:
    return PWComparator(margins, alpha).decide(data)
