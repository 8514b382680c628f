"""
Type I error bound functions for the unified superiority/non-inferiority test.

All quantities are expressed through the central multivariate t vector T.
Under a configuration with standardized shifts eta'_k, the non-inferiority
statistic of endpoint k is T_k + eta'_k and the superiority statistic is
T_k + eta'_k - c_k; the test rejects when every non-inferiority statistic and
at least p superiority statistics exceed the critical value.
"""

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from supnoninf.core import InvalidParameterError, get_logger
from supnoninf.montecarlo import RateEstimate, count_in_blocks
from supnoninf.mvt import CorrelationMatrix, sample_mvt, t_quantile, t_tail, upper_orthant_prob
from supnoninf.mvt.univariate import check_df

logger = get_logger(__name__)

# Stand-in for a mean difference at +infinity, in standard-error units.
INFINITE_SHIFT = 1e6


def _vector(values: Sequence[float], name: str) -> np.ndarray:
    array = np.atleast_1d(np.array(values, dtype=np.float64))
    if array.ndim != 1 or array.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty vector")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MarginVector:
    """Standardized combined margins c_k = (eps_k + eta_k) / SE_k."""

    c: np.ndarray

    def __post_init__(self):
        c = _vector(self.c, "margin vector")
        if np.any(np.isnan(c)) or np.any(c < 0):
            raise InvalidParameterError(
                "standardized margins must be nonnegative", details={"c": c.tolist()}
            )
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return int(self.c.size)

    @classmethod
    def common(cls, value: float, m: int) -> "MarginVector":
        return cls(np.full(m, float(value)))

    @classmethod
    def from_raw(
        cls, epsilon: Sequence[float], eta: Sequence[float], se: Sequence[float]
    ) -> "MarginVector":
        """Combine outcome-scale margins with per-endpoint standard errors."""
        eps = np.asarray(epsilon, dtype=np.float64)
        eta_arr = np.asarray(eta, dtype=np.float64)
        se_arr = np.asarray(se, dtype=np.float64)
        if np.any(se_arr <= 0):
            raise InvalidParameterError("standard errors must be positive")
        return cls((eps + eta_arr) / se_arr)

    def common_value(self, tol: float = 1e-12) -> Optional[float]:
        if float(self.c.max() - self.c.min()) <= tol:
            return float(self.c[0])
        return None

    def to_list(self) -> list[float]:
        return self.c.tolist()


@dataclass(frozen=True, eq=False)
class ThetaConfig:
    """
    A point of the parameter space in standardized form.

    eta_std[k] = (eta_k + theta_k) / SE_k. ``theta`` keeps the outcome-scale
    differences when the configuration was built from raw quantities.
    """

    eta_std: np.ndarray
    theta: Optional[np.ndarray] = None

    def __post_init__(self):
        eta_std = _vector(self.eta_std, "standardized shift")
        if np.any(np.isnan(eta_std)):
            raise InvalidParameterError("standardized shifts must not be NaN")
        object.__setattr__(self, "eta_std", eta_std)
        if self.theta is not None:
            theta = _vector(self.theta, "theta")
            if theta.shape != eta_std.shape:
                raise InvalidParameterError("theta and eta_std lengths differ")
            object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return int(self.eta_std.size)

    @classmethod
    def from_raw(
        cls, theta: Sequence[float], eta: Sequence[float], se: Sequence[float]
    ) -> "ThetaConfig":
        theta_arr = np.asarray(theta, dtype=np.float64)
        se_arr = np.asarray(se, dtype=np.float64)
        if np.any(se_arr <= 0):
            raise InvalidParameterError("standard errors must be positive")
        return cls((np.asarray(eta, dtype=np.float64) + theta_arr) / se_arr, theta=theta_arr)

    @classmethod
    def at_superiority_lfc(cls, c: MarginVector) -> "ThetaConfig":
        """theta_k = eps_k for every k."""
        return cls(np.array(c.c))

    @classmethod
    def at_noninferiority_lfc(
        cls, k: int, c: MarginVector, others_infinite: bool = False
    ) -> "ThetaConfig":
        """theta_k = -eta_k; the other endpoints sit at eps_i or at +infinity."""
        if not 0 <= k < c.dim:
            raise InvalidParameterError("endpoint index out of range", details={"k": k})
        eta_std = np.full(c.dim, INFINITE_SHIFT) if others_infinite else np.array(c.c)
        eta_std[k] = 0.0
        return cls(eta_std)

    def shifted(self, k: int, delta: float) -> "ThetaConfig":
        """Copy with endpoint ``k`` moved by ``delta`` standard errors."""
        eta_std = np.array(self.eta_std)
        eta_std[k] += delta
        return ThetaConfig(eta_std)


@dataclass(frozen=True)
class BoundEvaluation:
    """gamma1 and gamma2 at one alpha', with the integration error carried along."""

    alpha_prime: float
    critical_value: float
    gamma1: float
    gamma2: float
    abs_error: float
    method: str

    @property
    def value(self) -> float:
        return max(self.gamma1, self.gamma2)

    def to_dict(self) -> dict:
        return {
            "alpha_prime": self.alpha_prime,
            "critical_value": self.critical_value,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "bound": self.value,
            "abs_error": self.abs_error,
            "method": self.method,
        }


class _Accumulator:
    """Sums orthant probabilities and their error estimates."""

    def __init__(self):
        self.value = 0.0
        self.error = 0.0
        self.methods: set[str] = set()

    def add(self, estimate, sign: float = 1.0) -> None:
        self.value += sign * estimate.value
        self.error += estimate.abs_error
        self.methods.add(estimate.method)

    @property
    def method(self) -> str:
        for method in ("qmc", "quadrature", "closed_form"):
            if method in self.methods:
                return method
        return "closed_form"


def _check_alpha_prime(alpha_prime: float) -> None:
    if not 0.0 < alpha_prime < 1.0:
        raise InvalidParameterError(
            "alpha_prime must lie in (0, 1)", details={"alpha_prime": alpha_prime}
        )


def _check_dims(c: MarginVector, R: CorrelationMatrix) -> None:
    if c.dim != R.dim:
        raise InvalidParameterError(
            "margin vector and correlation dimensions differ",
            details={"c": c.dim, "R": R.dim},
        )


def _check_p(p: int, m: int) -> None:
    if not 1 <= p <= m:
        raise InvalidParameterError("p must lie in [1, m]", details={"p": p, "m": m})


def _superiority_orthant(
    t: float, c: MarginVector, R: CorrelationMatrix, d: float, subset: Sequence[int], **kw
):
    """P(T_k > t for k in subset, T_i > t - c_i otherwise)."""
    bounds = t - np.array(c.c)
    bounds[list(subset)] = t
    return upper_orthant_prob(bounds, R, d, **kw)


def _gamma1_sum(
    t: float, c: MarginVector, R: CorrelationMatrix, d: float, **kw
) -> _Accumulator:
    acc = _Accumulator()
    m = c.dim
    if R.exchangeable_rho() is not None and c.common_value() is not None:
        single = _superiority_orthant(t, c, R, d, [0], **kw)
        acc.value = m * single.value
        acc.error = m * single.abs_error
        acc.methods.add(single.method)
        return acc
    for k in range(m):
        acc.add(_superiority_orthant(t, c, R, d, [k], **kw))
    return acc


def _gamma1_subset_max(
    t: float, p: int, c: MarginVector, R: CorrelationMatrix, d: float, **kw
) -> _Accumulator:
    acc = _Accumulator()
    if R.exchangeable_rho() is not None and c.common_value() is not None:
        acc.add(_superiority_orthant(t, c, R, d, range(p), **kw))
        return acc
    best = None
    for subset in itertools.combinations(range(c.dim), p):
        estimate = _superiority_orthant(t, c, R, d, subset, **kw)
        if best is None or estimate.value > best.value:
            best = estimate
    acc.add(best)
    return acc


def gamma1(
    alpha_prime: float,
    c: MarginVector,
    R: CorrelationMatrix,
    d: float,
    seed: Optional[int] = None,
    target_abs_err: Optional[float] = None,
) -> float:
    """
    Sum over k of P(T_k > t, T_i > t - c_i for i != k) with t = t_{d,alpha'}.

    Exchangeable R with a common margin collapses the sum to m equal terms.
    """
    _check_alpha_prime(alpha_prime)
    _check_dims(c, R)
    t = t_quantile(alpha_prime, d)
    return _gamma1_sum(t, c, R, d, seed=seed, target_abs_err=target_abs_err).value


def gamma2(alpha_prime: float, c: MarginVector, d: float) -> float:
    """max_k P(T > t + c_k) + (m - 1) P(T > t); free of the correlation."""
    _check_alpha_prime(alpha_prime)
    t = t_quantile(alpha_prime, d)
    return _gamma2_at(t, 1, c, d)


def _gamma2_at(t: float, p: int, c: MarginVector, d: float) -> float:
    tails = np.sort(np.atleast_1d(t_tail(t + c.c, d)))[::-1]
    return float(tails[:p].sum()) + (c.dim - p) * t_tail(t, d)


def gamma1_p(
    alpha_prime: float,
    p: int,
    c: MarginVector,
    R: CorrelationMatrix,
    d: float,
    seed: Optional[int] = None,
    target_abs_err: Optional[float] = None,
) -> float:
    """
    P(T_k > t for k in S, T_i > t - c_i for i not in S) for a size-p set S.

    With exchangeable R and a common margin every S gives the same value;
    otherwise the largest value over all S is returned.
    """
    _check_alpha_prime(alpha_prime)
    _check_dims(c, R)
    _check_p(p, c.dim)
    t = t_quantile(alpha_prime, d)
    return _gamma1_subset_max(t, p, c, R, d, seed=seed, target_abs_err=target_abs_err).value


def gamma2_p(alpha_prime: float, p: int, c: MarginVector, d: float) -> float:
    """Largest sum of p shifted tails plus (m - p) unshifted tails."""
    _check_alpha_prime(alpha_prime)
    _check_p(p, c.dim)
    t = t_quantile(alpha_prime, d)
    return _gamma2_at(t, p, c, d)


def bound_at_alpha(
    alpha_prime: float,
    c: MarginVector,
    R: CorrelationMatrix,
    d: float,
    p: int = 1,
    seed: Optional[int] = None,
    target_abs_err: Optional[float] = None,
) -> BoundEvaluation:
    """
    Evaluate gamma1 and gamma2 (their p-of-m forms when p > 1) at ``alpha_prime``.

    Args:
        alpha_prime: Candidate adjusted level
        c: Standardized margins
        R: Correlation of the test statistics
        d: Degrees of freedom
        p: Number of endpoints required to be superior
        seed: Lattice integration seed
        target_abs_err: Lattice accuracy target

    Returns:
        BoundEvaluation whose ``value`` is max(gamma1, gamma2)
    """
    _check_alpha_prime(alpha_prime)
    _check_dims(c, R)
    _check_p(p, c.dim)
    t = t_quantile(alpha_prime, d)
    kw = {"seed": seed, "target_abs_err": target_abs_err}
    if p == 1:
        acc = _gamma1_sum(t, c, R, d, **kw)
    else:
        acc = _gamma1_subset_max(t, p, c, R, d, **kw)
    return BoundEvaluation(
        alpha_prime=alpha_prime,
        critical_value=t,
        gamma1=acc.value,
        gamma2=_gamma2_at(t, p, c, d),
        abs_error=acc.error,
        method=acc.method,
    )


def worsley_bound(
    theta_cfg: ThetaConfig,
    c: MarginVector,
    alpha_prime: float,
    R: CorrelationMatrix,
    d: float,
    center: int = 0,
    raw: bool = True,
    seed: Optional[int] = None,
    target_abs_err: Optional[float] = None,
) -> float:
    """
    Worsley upper bound on P(union of A_k) using the star tree centred at ``center``.

    A_k = {T_k > t - eta'_k + c_k} and {T_i > t - eta'_i for all i != k}, so
    the bound is sum_k P(A_k) - sum_{k != center} P(A_center and A_k). Every
    term is an upper-orthant probability. ``raw=False`` clamps to [0, 1].
    """
    _check_alpha_prime(alpha_prime)
    _check_dims(c, R)
    if theta_cfg.dim != c.dim:
        raise InvalidParameterError("theta configuration and margin dimensions differ")
    m = c.dim
    if not 0 <= center < m:
        raise InvalidParameterError("center index out of range", details={"center": center})

    t = t_quantile(alpha_prime, d)
    base = t - np.array(theta_cfg.eta_std)
    kw = {"seed": seed, "target_abs_err": target_abs_err}
    acc = _Accumulator()
    for k in range(m):
        bounds = base.copy()
        bounds[k] += c.c[k]
        acc.add(upper_orthant_prob(bounds, R, d, **kw))
    for k in range(m):
        if k == center:
            continue
        bounds = base.copy()
        bounds[center] += c.c[center]
        bounds[k] += c.c[k]
        acc.add(upper_orthant_prob(bounds, R, d, **kw), sign=-1.0)

    logger.debug("Worsley bound", value=acc.value, abs_error=acc.error, center=center)
    if raw:
        return acc.value
    return min(max(acc.value, 0.0), 1.0)


def mc_rejection_rate(
    theta_cfg: ThetaConfig,
    c: MarginVector,
    alpha_prime: float,
    R: CorrelationMatrix,
    d: float,
    p: int,
    reps: int,
    seed: int,
    threads: Optional[int] = None,
) -> RateEstimate:
    """
    Simulated frequency of rejecting the global null at ``theta_cfg``.

    Rejection needs every non-inferiority statistic and at least ``p``
    superiority statistics above t_{d,alpha'}.
    """
    _check_alpha_prime(alpha_prime)
    _check_dims(c, R)
    _check_p(p, c.dim)
    check_df(d)
    if theta_cfg.dim != c.dim:
        raise InvalidParameterError("theta configuration and margin dimensions differ")

    t = t_quantile(alpha_prime, d)
    shift = np.array(theta_cfg.eta_std)
    margin = np.array(c.c)

    def count(size: int, rng: np.random.Generator) -> int:
        stats = sample_mvt(size, R, d, rng) + shift
        noninferior = np.all(stats > t, axis=1)
        superior = np.count_nonzero(stats - margin > t, axis=1) >= p
        return int(np.count_nonzero(noninferior & superior))

    result = count_in_blocks(reps, seed, count, threads=threads)
    logger.debug("Rejection rate", rate=result.rate, se=result.se, reps=reps)
    return result


__all__ = [
    "INFINITE_SHIFT",
    "BoundEvaluation",
    "MarginVector",
    "ThetaConfig",
    "bound_at_alpha",
    "gamma1",
    "gamma1_p",
    "gamma2",
    "gamma2_p",
    "mc_rejection_rate",
    "worsley_bound",
]

