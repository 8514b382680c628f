"""Power of the unified test under an assumed alternative, and sample-size search."""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from supnoninf.alpha_solver import AdjustedAlpha, SolverConfig, solve_adjusted_alpha
from supnoninf.analysis.statistics import DFMode, MarginSpec
from supnoninf.core import InvalidParameterError, UnreachableTargetError, get_logger, settings
from supnoninf.error_rates import MarginVector, ThetaConfig, mc_rejection_rate
from supnoninf.mvt import CorrelationMatrix, rectangle_prob, upper_orthant_prob

logger = get_logger(__name__)

MIN_GROUP_SIZE = 2


class EffectScale(str, Enum):
    """Units of theta1 and the margins."""

    EFFECT_SIZE = "effect_size"
    OUTCOME = "outcome"


@dataclass(frozen=True, eq=False)
class PowerSpec:
    """
    Design assumptions for a power calculation.

    With ``scale = effect_size`` theta1 and the margins are in SD units and
    ``sd`` is ignored. alpha' is always solved at the margins implied by the
    group sizes, so a sample-size search re-solves it at every n.
    """

    theta1: Sequence[float]
    margins: MarginSpec
    R: CorrelationMatrix
    n_trt: int = 100
    n_ctl: int = 100
    sd: Optional[Sequence[float]] = None
    alpha: float = 0.05
    p: int = 1
    scale: EffectScale = EffectScale.EFFECT_SIZE
    df_mode: DFMode = DFMode.PER_ENDPOINT

    def __post_init__(self):
        theta1 = np.atleast_1d(np.array(self.theta1, dtype=np.float64))
        object.__setattr__(self, "theta1", theta1)
        object.__setattr__(self, "scale", EffectScale(self.scale))
        object.__setattr__(self, "df_mode", DFMode(self.df_mode))
        m = theta1.size
        if self.margins.dim != m or self.R.dim != m:
            raise InvalidParameterError(
                "theta1, margins and correlation dimensions differ",
                details={"theta1": m, "margins": self.margins.dim, "R": self.R.dim},
            )
        if self.n_trt < MIN_GROUP_SIZE or self.n_ctl < MIN_GROUP_SIZE:
            raise InvalidParameterError(
                "group sizes must be at least 2",
                details={"n_trt": self.n_trt, "n_ctl": self.n_ctl},
            )
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError("alpha must lie in (0, 1)")
        if not 1 <= self.p <= m:
            raise InvalidParameterError("p must lie in [1, m]", details={"p": self.p, "m": m})
        if self.scale is EffectScale.OUTCOME:
            if self.sd is None:
                raise InvalidParameterError("outcome-scale power needs sd")
            sd = np.atleast_1d(np.array(self.sd, dtype=np.float64))
            if sd.size != m or np.any(sd <= 0):
                raise InvalidParameterError("sd must hold m positive values")
            object.__setattr__(self, "sd", sd)

    @property
    def m(self) -> int:
        return int(self.theta1.size)

    @property
    def df(self) -> int:
        df = self.n_trt + self.n_ctl - 2
        return df * self.m if self.df_mode is DFMode.TOTAL else df

    def standard_errors(self) -> np.ndarray:
        root = math.sqrt(1.0 / self.n_trt + 1.0 / self.n_ctl)
        if self.scale is EffectScale.OUTCOME:
            return np.asarray(self.sd) * root
        return np.full(self.m, root)

    def margin_vector(self) -> MarginVector:
        return MarginVector.from_raw(self.margins.epsilon, self.margins.eta, self.standard_errors())

    def theta_config(self) -> ThetaConfig:
        return ThetaConfig.from_raw(self.theta1, self.margins.eta, self.standard_errors())

    def with_sizes(self, n_trt: int, n_ctl: int) -> "PowerSpec":
        return replace(self, n_trt=n_trt, n_ctl=n_ctl)


@dataclass(frozen=True)
class PowerResult:
    """Power with its provenance."""

    power: float
    se: float
    method: str
    alpha_prime: float
    critical_value: float
    c: tuple
    n_trt: int
    n_ctl: int
    abs_error: float = 0.0
    reps: Optional[int] = None
    solver: Optional[AdjustedAlpha] = field(default=None, compare=False, repr=False)

    def to_dict(self, diagnostics: bool = False) -> dict:
        data = {
            "power": self.power,
            "se": self.se,
            "method": self.method,
            "alpha_prime": self.alpha_prime,
            "critical_value": self.critical_value,
            "c": list(self.c),
            "n_trt": self.n_trt,
            "n_ctl": self.n_ctl,
            "abs_error": self.abs_error,
        }
        if self.reps is not None:
            data["reps"] = self.reps
        if diagnostics and self.solver is not None:
            data["solver"] = self.solver.to_dict()
        return data


def _solve(spec: PowerSpec) -> AdjustedAlpha:
    return solve_adjusted_alpha(
        spec.m,
        spec.margin_vector(),
        spec.R,
        spec.df,
        SolverConfig(alpha=spec.alpha, p=spec.p),
    )


def analytic_power(spec: PowerSpec, reps: int = 100_000, seed: int = 0) -> PowerResult:
    """
    P(all T_k > t - eta'_k) - P(t - eta'_k < T_k <= t - eta'_k + c_k for all k).

    The first term is the probability that every non-inferiority test
    rejects, the second that additionally no superiority test does. p > 1
    is handed to ``mc_power`` with ``reps`` and ``seed``.
    """
    if spec.p > 1:
        logger.info("No closed form for p > 1, using Monte Carlo power", p=spec.p)
        return mc_power(spec, reps=reps, seed=seed)

    solution = _solve(spec)
    t = solution.critical_value
    c = spec.margin_vector()
    lower = t - np.array(spec.theta_config().eta_std)
    upper = lower + c.c

    noninferior = upper_orthant_prob(lower, spec.R, spec.df)
    none_superior = rectangle_prob(lower, upper, spec.R, spec.df)
    power = min(max(noninferior.value - none_superior.value, 0.0), 1.0)
    logger.debug(
        "Analytic power",
        power=power,
        noninferior=noninferior.value,
        none_superior=none_superior.value,
    )
    return PowerResult(
        power=power,
        se=0.0,
        method="analytic",
        alpha_prime=solution.alpha_prime,
        critical_value=t,
        c=tuple(c.c.tolist()),
        n_trt=spec.n_trt,
        n_ctl=spec.n_ctl,
        abs_error=noninferior.abs_error + none_superior.abs_error,
        solver=solution,
    )


def mc_power(
    spec: PowerSpec, reps: int = 100_000, seed: int = 0, threads: Optional[int] = None
) -> PowerResult:
    """Simulated rejection frequency of the p-of-m rule at theta1."""
    solution = _solve(spec)
    c = spec.margin_vector()
    rate = mc_rejection_rate(
        spec.theta_config(),
        c,
        solution.alpha_prime,
        spec.R,
        spec.df,
        spec.p,
        reps=reps,
        seed=seed,
        threads=threads,
    )
    return PowerResult(
        power=rate.rate,
        se=rate.se,
        method="monte_carlo",
        alpha_prime=solution.alpha_prime,
        critical_value=solution.critical_value,
        c=tuple(c.c.tolist()),
        n_trt=spec.n_trt,
        n_ctl=spec.n_ctl,
        reps=reps,
        solver=solution,
    )


@dataclass(frozen=True)
class SampleSizeResult:
    n_trt: int
    n_ctl: int
    power: PowerResult
    target_power: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "n_trt": self.n_trt,
            "n_ctl": self.n_ctl,
            "target_power": self.target_power,
            "achieved_power": self.power.power,
            "evaluations": self.evaluations,
            "power": self.power.to_dict(),
        }


def min_sample_size(
    spec: PowerSpec,
    target_power: float,
    allocation_ratio: float = 1.0,
    max_n: Optional[int] = None,
    reps: int = 100_000,
    seed: int = 0,
) -> SampleSizeResult:
    """
    Smallest control size n (treatment ceil(ratio * n)) reaching ``target_power``.

    Doubles n until the target is met, then bisects the last bracket. alpha'
    is re-solved at every candidate because c_k and d move with n.

    Raises:
        UnreachableTargetError: If the target is not met by ``max_n``
    """
    if not 0.0 < target_power < 1.0:
        raise InvalidParameterError(
            "target_power must lie in (0, 1)", details={"target_power": target_power}
        )
    if not allocation_ratio > 0:
        raise InvalidParameterError("allocation_ratio must be positive")
    limit = max_n or settings.max_sample_size
    evaluations = 0

    def sizes(n: int) -> tuple[int, int]:
        return max(MIN_GROUP_SIZE, math.ceil(allocation_ratio * n)), n

    def power_at(n: int) -> PowerResult:
        nonlocal evaluations
        evaluations += 1
        result = analytic_power(spec.with_sizes(*sizes(n)), reps=reps, seed=seed)
        logger.debug("Sample size step", n=n, power=result.power)
        return result

    n = MIN_GROUP_SIZE
    result = power_at(n)
    if result.power >= target_power:
        return SampleSizeResult(*sizes(n), result, target_power, evaluations)

    low = n
    while True:
        n = min(2 * n, limit)
        result = power_at(n)
        if result.power >= target_power:
            break
        if n >= limit:
            raise UnreachableTargetError(
                "target power not reached within the sample-size limit",
                details={"target_power": target_power, "max_n": limit, "power": result.power},
            )
        low = n

    high, best = n, result
    while high - low > 1:
        mid = (low + high) // 2
        candidate = power_at(mid)
        if candidate.power >= target_power:
            high, best = mid, candidate
        else:
            low = mid

    logger.info("Sample size found", n_trt=sizes(high)[0], n_ctl=high, power=best.power)
    return SampleSizeResult(*sizes(high), best, target_power, evaluations)
