"""Bootstrap union-intersection / intersection-union test with a max-t superiority part."""

from typing import Optional

import numpy as np

from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.analysis.statistics import MarginSpec
from supnoninf.comparators.base import BaseComparator, ComparatorDecision, Method
from supnoninf.comparators.resampling import null_bootstrap, sample_moments, upper_critical_value
from supnoninf.core import InvalidParameterError, get_logger, settings

logger = get_logger(__name__)


class TLComparator(BaseComparator):
    """
    Reject when min_k t_ni > d3 and max_k t_sup > d4.

    d3 = t_{d,alpha}; d4 is the bootstrap cut-off making the joint event have
    probability alpha under resampling centred at mean difference epsilon.
    """

    method = Method.TL

    def __init__(
        self,
        margins: MarginSpec,
        alpha: float = 0.05,
        boot_reps: Optional[int] = None,
        threads: Optional[int] = None,
    ):
        super().__init__(margins, alpha)
        self.boot_reps = boot_reps or settings.boot_reps
        if self.boot_reps < 1:
            raise InvalidParameterError("boot_reps must be positive")
        self.threads = threads

    def decide(self, data: TwoGroupSample, seed: Optional[int] = None) -> ComparatorDecision:
        self._check(data)
        eps, eta = self.margins.epsilon, self.margins.eta
        observed = sample_moments(data)
        t_sup, t_ni = observed.t_stats(eps, eta)
        d3 = self.gate_value(observed.df)

        boot = null_bootstrap(
            data, eps, reps=self.boot_reps, seed=0 if seed is None else seed, threads=self.threads
        )
        b_sup, b_ni = boot.t_stats(eps, eta)
        gated = np.all(b_ni > d3, axis=1)
        d4 = upper_critical_value(b_sup.max(axis=1)[gated], self.alpha, total=self.boot_reps)

        min_ni = float(t_ni.min())
        max_sup = float(t_sup.max())
        reject = bool(min_ni > d3 and max_sup > d4)
        return ComparatorDecision(
            method=self.method,
            reject_h0=reject,
            statistics={"min_t_ni": min_ni, "max_t_sup": max_sup},
            critical_values={"d3": d3, "d4": d4},
            diagnostics={"gated_fraction": float(gated.mean()), "boot_reps": self.boot_reps},
        )


def tl_test(
    data: TwoGroupSample,
    margins: MarginSpec,
    alpha: float = 0.05,
    boot_reps: Optional[int] = None,
    seed: Optional[int] = None,
) -> ComparatorDecision:
    """One-shot TL decision on a benefit-oriented sample."""
    return TLComparator(margins, alpha, boot_reps=boot_reps).decide(data, seed=seed)
