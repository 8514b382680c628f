"""The unified superiority/non-inferiority test applied to raw two-group data."""

from typing import Optional

import numpy as np

from supnoninf.alpha_solver import SolverConfig, critical_value, solve_adjusted_alpha
from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.analysis.service import decide
from supnoninf.analysis.statistics import MarginSpec, pooled_correlation
from supnoninf.comparators.base import BaseComparator, ComparatorDecision, Method
from supnoninf.comparators.resampling import sample_moments
from supnoninf.core import InvalidParameterError
from supnoninf.error_rates import MarginVector


class UnifiedComparator(BaseComparator):
    """
    Compare t_sup and t_ni with t_{d,alpha'}.

    alpha' is fixed in advance (``alpha_prime``) or, with ``plug_in=True``,
    re-solved on every data set from its estimated margins and correlation.
    """

    method = Method.UNIFIED

    def __init__(
        self,
        margins: MarginSpec,
        alpha: float = 0.05,
        alpha_prime: Optional[float] = None,
        p: int = 1,
        plug_in: bool = False,
    ):
        super().__init__(margins, alpha)
        if alpha_prime is None and not plug_in:
            raise InvalidParameterError("a fixed alpha_prime or plug_in=True is required")
        self.alpha_prime = alpha_prime
        self.p = p
        self.plug_in = plug_in

    def decide(self, data: TwoGroupSample, seed: Optional[int] = None) -> ComparatorDecision:
        self._check(data)
        observed = sample_moments(data)
        t_sup, t_ni = observed.t_stats(self.margins.epsilon, self.margins.eta)
        t_sup, t_ni = t_sup[0], t_ni[0]

        alpha_prime = self.alpha_prime
        if self.plug_in:
            se = observed.pooled_se()[0]
            c = MarginVector.from_raw(self.margins.epsilon, self.margins.eta, se)
            R = pooled_correlation(observed.cov_trt[0], observed.cov_ctl[0])
            alpha_prime = solve_adjusted_alpha(
                data.m, c, R, observed.df, SolverConfig(alpha=self.alpha, p=self.p)
            ).alpha_prime

        crit = critical_value(alpha_prime, observed.df)
        decisions, success = decide(t_sup, t_ni, crit, self.p)
        return ComparatorDecision(
            method=self.method,
            reject_h0=success,
            statistics={
                "max_t_sup": float(np.max(t_sup)),
                "min_t_ni": float(np.min(t_ni)),
            },
            critical_values={"critical_value": crit, "alpha_prime": alpha_prime},
            diagnostics={"decisions": [d.value for d in decisions]},
        )
