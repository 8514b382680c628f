"""Two-group summary statistics, standardized margins and simultaneous bounds."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from supnoninf.core import InvalidParameterError
from supnoninf.error_rates import MarginVector
from supnoninf.mvt import CorrelationMatrix, t_quantile


class Direction(str, Enum):
    """Which way an endpoint improves."""

    HIGHER_IS_BETTER = "higher_is_better"
    LOWER_IS_BETTER = "lower_is_better"


class SEMode(str, Enum):
    POOLED = "pooled"
    UNPOOLED = "unpooled"


class DFMode(str, Enum):
    PER_ENDPOINT = "per_endpoint"
    TOTAL = "total"


@dataclass(frozen=True)
class EndpointSummary:
    """Per-endpoint means, dispersion and group sizes."""

    mean_trt: float
    mean_ctl: float
    n_trt: int
    n_ctl: int
    var_trt: Optional[float] = None
    var_ctl: Optional[float] = None
    pooled_sd: Optional[float] = None
    direction: Direction = Direction.HIGHER_IS_BETTER
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.n_trt < 2 or self.n_ctl < 2:
            raise InvalidParameterError(
                "each group needs at least two subjects",
                details={"endpoint": self.name, "n_trt": self.n_trt, "n_ctl": self.n_ctl},
            )
        for label in ("var_trt", "var_ctl", "pooled_sd"):
            value = getattr(self, label)
            if value is not None and not value >= 0:
                raise InvalidParameterError(
                    f"{label} must be nonnegative", details={"endpoint": self.name}
                )
        if (self.var_trt is None) != (self.var_ctl is None):
            raise InvalidParameterError(
                "var_trt and var_ctl must be supplied together", details={"endpoint": self.name}
            )
        if self.var_trt is None and self.pooled_sd is None:
            raise InvalidParameterError(
                "either group variances or a pooled SD is required",
                details={"endpoint": self.name},
            )

    @property
    def has_group_variances(self) -> bool:
        return self.var_trt is not None

    @property
    def difference(self) -> float:
        """Mean difference oriented so that positive values favour treatment."""
        diff = self.mean_trt - self.mean_ctl
        return -diff if self.direction is Direction.LOWER_IS_BETTER else diff

    def resolved_pooled_sd(self) -> float:
        if self.pooled_sd is not None:
            return float(self.pooled_sd)
        df = self.n_trt + self.n_ctl - 2
        return float(
            np.sqrt(((self.n_trt - 1) * self.var_trt + (self.n_ctl - 1) * self.var_ctl) / df)
        )

    def standard_error(self, se_mode: SEMode) -> float:
        if SEMode(se_mode) is SEMode.UNPOOLED:
            if not self.has_group_variances:
                raise InvalidParameterError(
                    "unpooled standard errors need group variances",
                    details={"endpoint": self.name},
                )
            return float(np.sqrt(self.var_trt / self.n_trt + self.var_ctl / self.n_ctl))
        return self.resolved_pooled_sd() * float(np.sqrt(1.0 / self.n_trt + 1.0 / self.n_ctl))


@dataclass(frozen=True)
class MarginSpec:
    """Superiority margins epsilon_k and non-inferiority margins eta_k (outcome units)."""

    epsilon: Tuple[float, ...]
    eta: Tuple[float, ...]

    def __post_init__(self):
        epsilon = tuple(float(v) for v in self.epsilon)
        eta = tuple(float(v) for v in self.eta)
        if len(epsilon) != len(eta) or not epsilon:
            raise InvalidParameterError(
                "epsilon and eta must be non-empty and of equal length",
                details={"epsilon": len(epsilon), "eta": len(eta)},
            )
        if any(not v >= 0 for v in epsilon + eta):
            raise InvalidParameterError("margins must be nonnegative")
        object.__setattr__(self, "epsilon", epsilon)
        object.__setattr__(self, "eta", eta)

    @property
    def dim(self) -> int:
        return len(self.epsilon)

    @classmethod
    def zeros(cls, m: int) -> "MarginSpec":
        return cls((0.0,) * m, (0.0,) * m)


def _check_lengths(summaries: Sequence[EndpointSummary], margins: MarginSpec) -> None:
    if not summaries:
        raise InvalidParameterError("at least one endpoint is required")
    if len(summaries) != margins.dim:
        raise InvalidParameterError(
            "endpoint and margin counts differ",
            details={"endpoints": len(summaries), "margins": margins.dim},
        )


def infer_se_mode(summaries: Sequence[EndpointSummary]) -> SEMode:
    """Unpooled when every endpoint carries group variances, pooled otherwise."""
    if all(s.has_group_variances for s in summaries):
        return SEMode.UNPOOLED
    return SEMode.POOLED


def standard_errors(summaries: Sequence[EndpointSummary], se_mode: SEMode) -> np.ndarray:
    se = np.array([s.standard_error(se_mode) for s in summaries])
    if np.any(se <= 0):
        raise InvalidParameterError(
            "standard error is zero", details={"endpoints": np.flatnonzero(se <= 0).tolist()}
        )
    return se


def standardize_margins(
    summaries: Sequence[EndpointSummary], margins: MarginSpec, se_mode: SEMode
) -> Tuple[MarginVector, np.ndarray]:
    """c_k = (epsilon_k + eta_k) / SE_k, returned with the SE vector."""
    _check_lengths(summaries, margins)
    se = standard_errors(summaries, se_mode)
    return MarginVector.from_raw(margins.epsilon, margins.eta, se), se


def t_statistics(
    summaries: Sequence[EndpointSummary], margins: MarginSpec, se_mode: SEMode
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Superiority and non-inferiority t statistics.

    t_sup = (D - epsilon) / SE and t_ni = (D + eta) / SE, with D the
    benefit-oriented mean difference.
    """
    _check_lengths(summaries, margins)
    se = standard_errors(summaries, se_mode)
    diff = np.array([s.difference for s in summaries])
    t_sup = (diff - np.array(margins.epsilon)) / se
    t_ni = (diff + np.array(margins.eta)) / se
    return t_sup, t_ni


def degrees_of_freedom(
    summaries: Sequence[EndpointSummary], df_mode: DFMode = DFMode.PER_ENDPOINT
) -> int:
    """n1 + n2 - 2, or m(n1 + n2 - 2) in ``total`` mode."""
    sizes = {(s.n_trt, s.n_ctl) for s in summaries}
    if len(sizes) != 1:
        raise InvalidParameterError(
            "group sizes must agree across endpoints", details={"sizes": sorted(sizes)}
        )
    n_trt, n_ctl = sizes.pop()
    df = n_trt + n_ctl - 2
    if DFMode(df_mode) is DFMode.TOTAL:
        df *= len(summaries)
    return df


def pooled_correlation(cov_trt: np.ndarray, cov_ctl: np.ndarray) -> CorrelationMatrix:
    """Correlation of the summed group covariance matrices."""
    a = np.atleast_2d(np.asarray(cov_trt, dtype=np.float64))
    b = np.atleast_2d(np.asarray(cov_ctl, dtype=np.float64))
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise InvalidParameterError(
            "covariance matrices must be square and of equal shape",
            details={"cov_trt": list(a.shape), "cov_ctl": list(b.shape)},
        )
    total = a + b
    diag = np.diag(total)
    if np.any(diag <= 0):
        raise InvalidParameterError("zero variance on the covariance diagonal")
    scale = np.sqrt(diag)
    corr = total / np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(corr)


def armitage_parmar_rho0(R: CorrelationMatrix) -> float:
    """
    Common correlation summarizing R.

    rho0 = mean|r_ij| + 4 * sum(|r_ij| - mean)^2 / (m(m - 1)) over i < j.
    """
    m = R.dim
    if m < 2:
        raise InvalidParameterError("rho0 needs at least two endpoints", details={"m": m})
    upper = np.abs(R.entries[np.triu_indices(m, k=1)])
    mean = float(upper.mean())
    return mean + 4.0 * float(((upper - mean) ** 2).sum()) / (m * (m - 1))


def simultaneous_ci(
    summaries: Sequence[EndpointSummary],
    alpha_prime: float,
    df: float,
    se_mode: SEMode,
) -> np.ndarray:
    """Lower limits L_k = D_k - t_{d,alpha'} SE_k of the one-sided intervals [L_k, inf)."""
    crit = t_quantile(alpha_prime, df)
    se = standard_errors(summaries, se_mode)
    diff = np.array([s.difference for s in summaries])
    return diff - crit * se


def endpoint_names(summaries: Sequence[EndpointSummary]) -> List[str]:
    return [s.name or f"endpoint_{k + 1}" for k, s in enumerate(summaries)]
