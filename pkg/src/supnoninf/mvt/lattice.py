"""
Randomized lattice rule for central multivariate t rectangle probabilities.

Separation-of-variables form with a permuted, scaled Cholesky factor; the
first lattice coordinate drives the chi variate, the remaining ones the
sequential conditional normals. Each round uses a rank-1 lattice built by
fast component-by-component construction and K random shifts with tent
periodization; the spread of the K shifted estimates gives the error.
"""

import math
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.fft import fft, ifft
from scipy.special import gammaincinv, ndtr, ndtri

from supnoninf.core import AccuracyNotReachedError, get_logger, settings
from supnoninf.mvt.base import CorrelationMatrix, ProbEstimate

logger = get_logger(__name__)

_EPS = np.finfo(np.float64).eps


def _primes_up_to(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(math.isqrt(n)) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)


def _prime_factors(n: int) -> list[int]:
    factors = set()
    for p in _primes_up_to(int(math.isqrt(n)) + 1):
        p = int(p)
        while n % p == 0:
            factors.add(p)
            n //= p
        if n == 1:
            break
    if n != 1:
        factors.add(n)
    return sorted(factors)


def _primitive_root(p: int) -> int:
    pm = p - 1
    factors = _prime_factors(pm)
    r = 2
    k = 0
    while k < len(factors):
        if pow(r, pm // factors[k], p) == 1:
            r += 1
            k = 0
        else:
            k += 1
    return r


@lru_cache(maxsize=64)
def cbc_lattice(n_dim: int, n_points: int) -> tuple[np.ndarray, int]:
    """
    Rank-1 lattice generating vector by fast component-by-component search.

    The point count is rounded down to a prime.

    Returns:
        (generator vector in (0, 1)^n_dim, prime number of points)
    """
    n_points = int(_primes_up_to(max(n_points, 5))[-1])
    z = np.arange(1, n_dim + 1)
    half = (n_points - 1) // 2
    g = _primitive_root(n_points)

    perm = np.ones(half, dtype=np.int64)
    for j in range(half - 1):
        perm[j + 1] = (g * perm[j]) % n_points
    perm = np.minimum(n_points - perm, perm)
    pn = perm / n_points
    kernel = pn * pn - pn + 1.0 / 6
    kernel_fft = fft(kernel)

    weights = np.hstack([1.0, 0.8 ** np.arange(n_dim - 1)])
    q = np.ones(half)
    w = 0
    for s in range(1, n_dim):
        reordered = np.hstack([kernel[: w + 1][::-1], kernel[w + 1 : half][::-1]])
        q = q * (1.0 + weights[s - 1] * reordered)
        w = int(ifft(kernel_fft * fft(q)).real.argmin())
        z[s] = perm[w]
    generator = z / n_points
    generator.setflags(write=False)
    return generator, n_points


def _swap(x: np.ndarray, a, b) -> None:
    tmp = x[a].copy()
    x[a] = x[b].copy()
    x[b] = tmp


def permuted_cholesky(
    corr: np.ndarray, lower: np.ndarray, upper: np.ndarray, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Scaled Cholesky factor with variables reordered by expected interval mass.

    Each row is divided by its diagonal so that integration limits of the
    sequential conditionals become plain normal bounds.
    """
    cho = np.array(corr, dtype=np.float64)
    lo = np.array(lower, dtype=np.float64)
    hi = np.array(upper, dtype=np.float64)
    n = cho.shape[0]

    y = np.zeros(n)
    sqrt_2pi = math.sqrt(2 * math.pi)
    for k in range(n):
        best = k
        ck = 0.0
        mass = 1.0
        lo_best = hi_best = 0.0
        for i in range(k, n):
            if cho[i, i] > tol:
                ci = math.sqrt(cho[i, i])
                shift = cho[i, :k] @ y[:k] if k > 0 else 0.0
                lo_i = (lo[i] - shift) / ci
                hi_i = (hi[i] - shift) / ci
                mass_i = ndtr(hi_i) - ndtr(lo_i)
                if mass_i <= mass:
                    ck, mass, lo_best, hi_best, best = ci, mass_i, lo_i, hi_i, i
        if best > k:
            cho[best, best] = cho[k, k]
            _swap(cho, np.s_[best, :k], np.s_[k, :k])
            _swap(cho, np.s_[best + 1 :, best], np.s_[best + 1 :, k])
            _swap(cho, np.s_[k + 1 : best, k], np.s_[best, k + 1 : best])
            _swap(lo, k, best)
            _swap(hi, k, best)
        if ck > (k + 1) * tol:
            cho[k, k] = ck
            cho[k, k + 1 :] = 0.0
            for i in range(k + 1, n):
                cho[i, k] /= ck
                cho[i, k + 1 : i + 1] -= cho[i, k] * cho[k + 1 : i + 1, k]
            if abs(mass) > tol:
                y[k] = (
                    math.exp(-lo_best * lo_best / 2) - math.exp(-hi_best * hi_best / 2)
                ) / (sqrt_2pi * mass)
            else:
                y[k] = (lo_best + hi_best) / 2
                if lo_best < -10:
                    y[k] = hi_best
                elif hi_best > 10:
                    y[k] = lo_best
            cho[k, : k + 1] /= ck
            lo[k] /= ck
            hi[k] /= ck
        else:
            cho[k:, k] = 0.0
            y[k] = (lo[k] + hi[k]) / 2
    return cho, lo, hi


def _shifted_estimate(
    cho: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    d: float,
    generator: np.ndarray,
    n_points: int,
    shift: np.ndarray,
) -> float:
    n = cho.shape[0]
    index = np.arange(1, n_points + 1)
    pv = np.ones(n_points)
    s = np.zeros((n, n_points))
    c = dc = None
    scale = None
    for i in range(n):
        z = generator[i] * index + shift[i]
        z -= np.floor(z)
        x = np.clip(np.abs(2.0 * z - 1.0), _EPS, 1.0 - _EPS)
        if i == 0:
            if math.isinf(d):
                scale = np.ones(n_points)
            else:
                scale = np.sqrt(2.0 * gammaincinv(d / 2.0, x))
        else:
            y = ndtri(np.clip(c + x * dc, _EPS / 2, 1.0 - _EPS / 2))
            s[i:, :] += cho[i:, i - 1][:, np.newaxis] * y
        with np.errstate(invalid="ignore"):
            lo_i = lo[i] * scale - s[i]
            hi_i = hi[i] * scale - s[i]
        c = ndtr(np.nan_to_num(lo_i, nan=-np.inf))
        upper = ndtr(np.nan_to_num(hi_i, nan=np.inf))
        dc = np.clip(upper - c, 0.0, 1.0)
        pv *= dc
    return float(pv.mean())


def lattice_rect_prob(
    lower: np.ndarray,
    upper: np.ndarray,
    corr: CorrelationMatrix,
    d: float,
    target_abs_err: Optional[float] = None,
    seed: Optional[int] = None,
    randomizations: Optional[int] = None,
    max_points: Optional[int] = None,
) -> ProbEstimate:
    """
    Rectangle probability of a central multivariate t by randomized lattice rules.

    Rounds grow the lattice until three standard errors of the K shifted
    estimates fall below ``target_abs_err``; rounds are pooled by inverse
    variance.

    Args:
        lower: Lower bounds (length m, -inf allowed)
        upper: Upper bounds (length m, +inf allowed)
        corr: Correlation matrix
        d: Degrees of freedom (inf for the normal case)
        target_abs_err: Requested absolute error
        seed: Seed for the random shifts
        randomizations: Number of random shifts per round (at least 12)
        max_points: Budget on lattice points summed over shifts and rounds

    Returns:
        ProbEstimate with method "qmc"

    Raises:
        AccuracyNotReachedError: If the budget runs out first
    """
    target = target_abs_err if target_abs_err is not None else settings.target_abs_err
    shifts = max(12, randomizations if randomizations is not None else settings.qmc_randomizations)
    budget = max_points if max_points is not None else settings.qmc_max_points
    rng = np.random.default_rng(settings.qmc_seed if seed is None else seed)

    m = corr.dim
    scale = 1.0 if math.isinf(d) else math.sqrt(d)
    cho, lo, hi = permuted_cholesky(
        corr.entries, np.asarray(lower, dtype=np.float64) / scale,
        np.asarray(upper, dtype=np.float64) / scale,
    )

    prob = 0.0
    error = math.inf
    used = 0
    n_target = 256 * m
    rounds = 0
    while True:
        generator, n_points = cbc_lattice(m, n_target)
        estimates = np.array([
            _shifted_estimate(cho, lo, hi, d, generator, n_points, rng.random(m))
            for _ in range(shifts)
        ])
        used += n_points * shifts
        rounds += 1
        p_round = float(estimates.mean())
        e_round = 3.0 * float(estimates.std(ddof=1)) / math.sqrt(shifts)
        if rounds == 1:
            prob, error = p_round, e_round
        else:
            weight = 1.0 / (1.0 + (e_round / error) ** 2)
            prob += weight * (p_round - prob)
            error = math.sqrt(weight) * e_round

        logger.debug("Lattice round", m=m, points=n_points, estimate=prob, error=error)
        if error <= target:
            return ProbEstimate(
                value=prob,
                abs_error=error,
                method="qmc",
                details={"points": used, "rounds": rounds},
            )
        if used >= budget:
            best = ProbEstimate(
                value=prob, abs_error=error, method="qmc",
                details={"points": used, "rounds": rounds},
            )
            raise AccuracyNotReachedError(
                "lattice integration budget exhausted before target accuracy",
                best_estimate=best,
                details={"target_abs_err": target, "points": used},
            )
        n_target = int(n_target * 2)
