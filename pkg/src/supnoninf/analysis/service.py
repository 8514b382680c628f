"""Trial analysis: decisions, overall success and simultaneous confidence bounds."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from supnoninf.alpha_solver import AdjustedAlpha, SolverConfig, solve_adjusted_alpha
from supnoninf.analysis.statistics import (
    DFMode,
    Direction,
    EndpointSummary,
    MarginSpec,
    SEMode,
    armitage_parmar_rho0,
    degrees_of_freedom,
    endpoint_names,
    infer_se_mode,
    pooled_correlation,
    simultaneous_ci,
    standardize_margins,
    t_statistics,
)
from supnoninf.core import InvalidParameterError, get_logger
from supnoninf.error_rates import MarginVector
from supnoninf.montecarlo import count_in_blocks
from supnoninf.mvt import CorrelationMatrix, sample_mvt, t_quantile

logger = get_logger(__name__)


class Decision(str, Enum):
    SUPERIOR = "superior"
    NONINFERIOR_ONLY = "noninferior_only"
    FAIL = "fail"


class CorrelationSource(str, Enum):
    POOLED_MATRIX = "pooled_matrix"
    SUPPLIED_MATRIX = "supplied_matrix"
    RHO0_EXCHANGEABLE = "rho0_exchangeable"


@dataclass
class TrialResult:
    """Outcome of the unified superiority/non-inferiority analysis."""

    endpoints: List[str]
    t_stats: np.ndarray
    t_ni: np.ndarray
    c: np.ndarray
    se: np.ndarray
    alpha: float
    p: int
    alpha_prime: float
    critical_value: float
    decisions: List[Decision]
    overall_success: bool
    ci_lower: np.ndarray
    df_used: float
    se_mode: SEMode
    df_mode: DFMode
    correlation_source: CorrelationSource
    correlation: List[List[float]]
    rho0: Optional[float] = None
    solver: Optional[AdjustedAlpha] = None
    metadata: Dict = field(default_factory=dict)

    @property
    def superior_endpoints(self) -> List[int]:
        """1-based indices of endpoints declared superior."""
        return [k + 1 for k, d in enumerate(self.decisions) if d is Decision.SUPERIOR]

    @property
    def ci_joint_level(self) -> float:
        return 1.0 - self.alpha

    def to_dict(self, diagnostics: bool = False) -> dict:
        data = {
            "endpoints": [
                {
                    "name": name,
                    "t_sup": float(self.t_stats[k]),
                    "t_ni": float(self.t_ni[k]),
                    "c": float(self.c[k]),
                    "se": float(self.se[k]),
                    "decision": self.decisions[k].value,
                    "ci_lower": float(self.ci_lower[k]),
                }
                for k, name in enumerate(self.endpoints)
            ],
            "alpha": self.alpha,
            "p": self.p,
            "alpha_prime": self.alpha_prime,
            "critical_value": self.critical_value,
            "df_used": self.df_used,
            "overall_success": self.overall_success,
            "superior_endpoints": self.superior_endpoints,
            "ci_joint_level": self.ci_joint_level,
            "se_mode": self.se_mode.value,
            "df_mode": self.df_mode.value,
            "correlation": {
                "source": self.correlation_source.value,
                "matrix": self.correlation,
                "rho0": self.rho0,
            },
        }
        if diagnostics and self.solver is not None:
            data["solver"] = self.solver.to_dict(with_history=True)
        return data


def decide(
    t_sup: Sequence[float], t_ni: Sequence[float], crit: float, p: int = 1
) -> tuple[List[Decision], bool]:
    """Per-endpoint decisions and overall success (no failures, at least p superior)."""
    decisions = []
    for sup, ni in zip(t_sup, t_ni):
        if sup > crit:
            decisions.append(Decision.SUPERIOR)
        elif ni > crit:
            decisions.append(Decision.NONINFERIOR_ONLY)
        else:
            decisions.append(Decision.FAIL)
    success = Decision.FAIL not in decisions and decisions.count(Decision.SUPERIOR) >= p
    return decisions, success


def resolve_correlation(
    source: CorrelationSource,
    m: int,
    R: Optional[CorrelationMatrix] = None,
    cov_trt: Optional[np.ndarray] = None,
    cov_ctl: Optional[np.ndarray] = None,
    rho0: Optional[float] = None,
) -> tuple[CorrelationMatrix, Optional[float]]:
    """The correlation matrix used for alpha', plus rho0 when it was formed."""
    source = CorrelationSource(source)
    if source is CorrelationSource.POOLED_MATRIX:
        if cov_trt is None or cov_ctl is None:
            raise InvalidParameterError("pooled_matrix needs both group covariance matrices")
        matrix = pooled_correlation(cov_trt, cov_ctl)
    elif source is CorrelationSource.SUPPLIED_MATRIX:
        if R is None:
            raise InvalidParameterError("supplied_matrix needs a correlation matrix")
        matrix = R
    else:
        if rho0 is None:
            if R is not None:
                base = R
            elif cov_trt is not None and cov_ctl is not None:
                base = pooled_correlation(cov_trt, cov_ctl)
            else:
                raise InvalidParameterError(
                    "rho0_exchangeable needs rho0, a matrix or covariance matrices"
                )
            rho0 = armitage_parmar_rho0(base) if m > 1 else 0.0
        return CorrelationMatrix.exchangeable(m, rho0), float(rho0)

    if matrix.dim != m:
        raise InvalidParameterError(
            "correlation dimension differs from the number of endpoints",
            details={"R": matrix.dim, "m": m},
        )
    return matrix, None


def _oriented(
    summaries: Sequence[EndpointSummary],
    R: Optional[CorrelationMatrix],
    cov_trt: Optional[np.ndarray],
    cov_ctl: Optional[np.ndarray],
) -> tuple:
    """Flip rows and columns of lower-is-better endpoints so correlations refer to benefit."""
    sign = np.array([-1.0 if s.direction is Direction.LOWER_IS_BETTER else 1.0 for s in summaries])
    if np.all(sign > 0):
        return R, cov_trt, cov_ctl
    flip = np.outer(sign, sign)
    if R is not None:
        R = CorrelationMatrix(np.asarray(R.entries) * flip)
    if cov_trt is not None:
        cov_trt = np.asarray(cov_trt, dtype=np.float64) * flip
    if cov_ctl is not None:
        cov_ctl = np.asarray(cov_ctl, dtype=np.float64) * flip
    return R, cov_trt, cov_ctl


def analyze(
    summaries: Sequence[EndpointSummary],
    margins: MarginSpec,
    alpha: float = 0.025,
    p: int = 1,
    correlation_source: CorrelationSource = CorrelationSource.POOLED_MATRIX,
    se_mode: Optional[SEMode] = None,
    df_mode: DFMode = DFMode.PER_ENDPOINT,
    R: Optional[CorrelationMatrix] = None,
    cov_trt: Optional[np.ndarray] = None,
    cov_ctl: Optional[np.ndarray] = None,
    rho0: Optional[float] = None,
    zeta: Optional[float] = None,
    max_iters: Optional[int] = None,
) -> TrialResult:
    """
    Solve alpha', classify each endpoint and form the simultaneous lower bounds.

    Args:
        summaries: One summary per endpoint
        margins: Superiority and non-inferiority margins
        alpha: Overall one-sided level
        p: Endpoints required to be superior
        correlation_source: How the correlation of the statistics is obtained
        se_mode: pooled or unpooled (inferred from the summaries when None)
        df_mode: per_endpoint (n1 + n2 - 2) or total (m times that)
        R: Supplied correlation matrix
        cov_trt: Treatment covariance matrix
        cov_ctl: Control covariance matrix
        rho0: Common correlation for the exchangeable source
        zeta: Bisection precision
        max_iters: Bisection iteration limit

    Returns:
        TrialResult
    """
    m = len(summaries)
    if not 1 <= p <= max(m, 1):
        raise InvalidParameterError("p must lie in [1, m]", details={"p": p, "m": m})
    se_mode = SEMode(se_mode) if se_mode is not None else infer_se_mode(summaries)
    df_mode = DFMode(df_mode)
    correlation_source = CorrelationSource(correlation_source)

    c, se = standardize_margins(summaries, margins, se_mode)
    t_sup, t_ni = t_statistics(summaries, margins, se_mode)
    df = degrees_of_freedom(summaries, df_mode)
    R, cov_trt, cov_ctl = _oriented(summaries, R, cov_trt, cov_ctl)
    matrix, used_rho0 = resolve_correlation(correlation_source, m, R, cov_trt, cov_ctl, rho0)

    cfg = SolverConfig(alpha=alpha, zeta=zeta, max_iters=max_iters, p=p)
    solution = solve_adjusted_alpha(m, c, matrix, df, cfg)
    crit = solution.critical_value
    decisions, success = decide(t_sup, t_ni, crit, p)
    ci_lower = simultaneous_ci(summaries, solution.alpha_prime, df, se_mode)

    logger.info(
        "Analysis complete",
        m=m,
        alpha_prime=solution.alpha_prime,
        critical_value=crit,
        success=success,
    )
    return TrialResult(
        endpoints=endpoint_names(summaries),
        t_stats=t_sup,
        t_ni=t_ni,
        c=np.array(c.c),
        se=se,
        alpha=alpha,
        p=p,
        alpha_prime=solution.alpha_prime,
        critical_value=crit,
        decisions=decisions,
        overall_success=success,
        ci_lower=ci_lower,
        df_used=df,
        se_mode=se_mode,
        df_mode=df_mode,
        correlation_source=correlation_source,
        correlation=matrix.to_list(),
        rho0=used_rho0,
        solver=solution,
    )


@dataclass(frozen=True)
class CoverageResult:
    """
    Simulated coverage of the simultaneous bounds at the superiority LFC.

    ``claim_coverage`` is the frequency with which the bounds do not support
    a false overall success claim (all L_k > -eta_k and at least p of
    L_k > eps_k); ``rectangle_coverage`` is the frequency of L_k <= D_k for
    every k.
    """

    claim_coverage: float
    claim_se: float
    rectangle_coverage: float
    rectangle_se: float
    reps: int
    alpha_prime: float

    def to_dict(self) -> dict:
        return {
            "claim_coverage": self.claim_coverage,
            "claim_se": self.claim_se,
            "rectangle_coverage": self.rectangle_coverage,
            "rectangle_se": self.rectangle_se,
            "reps": self.reps,
            "alpha_prime": self.alpha_prime,
        }


def simulate_ci_coverage(
    c: MarginVector,
    R: CorrelationMatrix,
    d: float,
    alpha_prime: float,
    reps: int,
    seed: int,
    p: int = 1,
    threads: Optional[int] = None,
) -> CoverageResult:
    """
    Monte Carlo coverage of [L_1, inf) x ... x [L_m, inf) with true D_k = eps_k.

    On the SE scale L_k - eps_k = T_k - t, so only c, R, d and alpha' matter.
    """
    crit = t_quantile(alpha_prime, d)
    margin = np.array(c.c)

    def false_claims(size: int, rng: np.random.Generator) -> int:
        lower = sample_mvt(size, R, d, rng) - crit
        noninferior = np.all(lower > -margin, axis=1)
        superior = np.count_nonzero(lower > 0.0, axis=1) >= p
        return int(np.count_nonzero(noninferior & superior))

    def misses(size: int, rng: np.random.Generator) -> int:
        lower = sample_mvt(size, R, d, rng) - crit
        return int(np.count_nonzero(np.any(lower > 0.0, axis=1)))

    claim = count_in_blocks(reps, seed, false_claims, threads=threads)
    rectangle = count_in_blocks(reps, seed, misses, threads=threads)
    return CoverageResult(
        claim_coverage=1.0 - claim.rate,
        claim_se=claim.se,
        rectangle_coverage=1.0 - rectangle.rate,
        rectangle_se=rectangle.se,
        reps=reps,
        alpha_prime=alpha_prime,
    )
