"""
Adjusted significance level by bisection, critical values, and published grids.

The solver looks for the largest alpha' in [alpha/m, alpha] with
max(gamma1(alpha'), gamma2(alpha')) <= alpha.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from supnoninf.core import ConvergenceError, InvalidParameterError, get_logger, settings
from supnoninf.error_rates import BoundEvaluation, MarginVector, bound_at_alpha
from supnoninf.mvt import CorrelationMatrix, t_quantile
from supnoninf.mvt.univariate import check_df
from supnoninf.utils.io_utils import write_csv

logger = get_logger(__name__)

GRID_COLUMNS = ("m", "rho", "c", "d", "alpha", "alpha_prime", "critical_value")

PUBLISHED_RHOS = (0.0, 0.5)
PUBLISHED_MARGINS = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0)
PUBLISHED_DFS = (10, 20, 30, 40, 50, 100, 200)


@dataclass(frozen=True)
class SolverConfig:
    """Bisection settings; ``None`` fields fall back to ``settings``."""

    alpha: float = 0.05
    zeta: Optional[float] = None
    max_iters: Optional[int] = None
    p: int = 1
    seed: Optional[int] = None
    target_abs_err: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError("alpha must lie in (0, 1)", details={"alpha": self.alpha})
        if self.zeta is None:
            object.__setattr__(self, "zeta", settings.zeta)
        if self.max_iters is None:
            object.__setattr__(self, "max_iters", settings.max_iters)
        if not self.zeta > 0:
            raise InvalidParameterError("zeta must be positive", details={"zeta": self.zeta})
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be at least 1")
        if self.p < 1:
            raise InvalidParameterError("p must be at least 1", details={"p": self.p})


@dataclass(frozen=True)
class AdjustedAlpha:
    """Solved alpha' with its critical value and solver diagnostics."""

    alpha_prime: float
    critical_value: float
    achieved_bound: float
    iterations: int
    bracket: tuple[float, float]
    gamma1: float
    gamma2: float
    abs_error: float
    method: str
    boundary: Optional[str] = None
    history: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self, with_history: bool = False) -> dict:
        data = asdict(self)
        data["bracket"] = list(self.bracket)
        data.pop("history")
        if with_history:
            data["history"] = [list(step) for step in self.history]
        return data


class CurvePoint(NamedTuple):
    c: float
    critical_value: float


def critical_value(alpha_prime: float, d: float) -> float:
    """t_{d,alpha'}, the upper 100 alpha' percentage point."""
    return t_quantile(alpha_prime, d)


def _round(value: float, digits: int) -> float:
    return float(round(float(value), digits)) if math.isfinite(value) else float(value)


def _canonical(
    c: MarginVector, R: CorrelationMatrix, d: float, digits: int
) -> tuple[tuple, tuple, float]:
    c_key = tuple(_round(v, digits) for v in c.c)
    R_key = R.cache_key(digits)
    try:
        CorrelationMatrix(np.array(R_key).reshape(R.dim, R.dim))
    except InvalidParameterError:
        R_key = tuple(R.entries.ravel().tolist())
    return c_key, R_key, _round(d, digits)


def solve_adjusted_alpha(
    m: int,
    c: MarginVector,
    R: CorrelationMatrix,
    d: float,
    cfg: Optional[SolverConfig] = None,
) -> AdjustedAlpha:
    """
    Largest alpha' in [alpha/m, alpha] keeping max(gamma1, gamma2) <= alpha.

    Inputs are rounded to ``settings.cache_round_digits`` decimals before the
    search, so results are identical with the cache enabled or disabled.

    Args:
        m: Number of endpoints
        c: Standardized margins (length m)
        R: Correlation of the test statistics (m x m)
        d: Degrees of freedom
        cfg: Solver settings (alpha, zeta, max_iters, p, seed)

    Returns:
        AdjustedAlpha

    Raises:
        InvalidParameterError: On inconsistent dimensions or p out of range
        ConvergenceError: If max_iters bisection steps do not settle
        AccuracyNotReachedError: Propagated from the integration kernel
    """
    cfg = cfg or SolverConfig()
    if m < 1 or c.dim != m or R.dim != m:
        raise InvalidParameterError(
            "m, margin vector and correlation dimensions must agree",
            details={"m": m, "c": c.dim, "R": R.dim},
        )
    if cfg.p > m:
        raise InvalidParameterError("p must lie in [1, m]", details={"p": cfg.p, "m": m})
    check_df(d)

    c_key, R_key, d_key = _canonical(c, R, d, settings.cache_round_digits)
    args = (m, c_key, R_key, d_key, cfg)
    if settings.solver_cache_enabled:
        return _solve_cached(*args)
    return _solve(*args)


def _solve(
    m: int, c_key: tuple, R_key: tuple, d: float, cfg: SolverConfig
) -> AdjustedAlpha:
    c = MarginVector(np.array(c_key))
    R = CorrelationMatrix(np.array(R_key).reshape(m, m))
    alpha, zeta = cfg.alpha, cfg.zeta
    history: list[tuple[float, float]] = []

    def evaluate(alpha_prime: float) -> BoundEvaluation:
        bound = bound_at_alpha(
            alpha_prime, c, R, d, p=cfg.p, seed=cfg.seed, target_abs_err=cfg.target_abs_err
        )
        history.append((alpha_prime, bound.value))
        logger.debug(
            "Bisection step",
            alpha_prime=alpha_prime,
            gamma1=bound.gamma1,
            gamma2=bound.gamma2,
        )
        return bound

    def result(
        bound: BoundEvaluation, iterations: int, bracket: tuple, boundary: Optional[str] = None
    ) -> AdjustedAlpha:
        return AdjustedAlpha(
            alpha_prime=bound.alpha_prime,
            critical_value=bound.critical_value,
            achieved_bound=bound.value,
            iterations=iterations,
            bracket=(float(bracket[0]), float(bracket[1])),
            gamma1=bound.gamma1,
            gamma2=bound.gamma2,
            abs_error=bound.abs_error,
            method=bound.method,
            boundary=boundary,
            history=tuple(history),
        )

    lo, hi = alpha / m, alpha
    at_hi = evaluate(hi)
    if at_hi.value - alpha <= 0.0:
        return result(at_hi, 0, (lo, hi), boundary="alpha")
    at_lo = evaluate(lo)
    if at_lo.value - alpha >= -zeta:
        return result(at_lo, 0, (lo, hi), boundary="alpha_over_m")

    for iteration in range(1, cfg.max_iters + 1):
        mid = (lo + hi) / 2.0
        at_mid = evaluate(mid)
        f = at_mid.value - alpha
        if abs(f) <= zeta:
            return result(at_mid, iteration, (lo, hi))
        if f < 0:
            lo, at_lo = mid, at_mid
        else:
            hi = mid
        if hi - lo <= zeta * alpha:
            return result(at_lo, iteration, (lo, hi))

    raise ConvergenceError(
        "bisection did not converge within max_iters",
        bracket=(lo, hi),
        details={"max_iters": cfg.max_iters},
    )


_solve_cached = lru_cache(maxsize=4096)(_solve)


def clear_solver_cache() -> None:
    _solve_cached.cache_clear()


@dataclass(frozen=True)
class GridRow:
    """One cell of an alpha' table."""

    m: int
    rho: float
    c: float
    d: float
    alpha: float
    alpha_prime: float
    critical_value: float
    p: int = 1

    def values(self) -> tuple:
        return tuple(getattr(self, column) for column in GRID_COLUMNS)


def _solve_cell(m: int, rho: float, c: float, d: float, cfg: SolverConfig) -> GridRow:
    solution = solve_adjusted_alpha(
        m, MarginVector.common(c, m), CorrelationMatrix.exchangeable(m, rho), d, cfg
    )
    return GridRow(m, rho, c, d, cfg.alpha, solution.alpha_prime, solution.critical_value, cfg.p)


def table1_grid(
    m_list: Sequence[int] = (2, 3),
    rho_list: Sequence[float] = PUBLISHED_RHOS,
    c_list: Sequence[float] = PUBLISHED_MARGINS,
    d_list: Sequence[float] = PUBLISHED_DFS,
    alpha: float = 0.05,
    p: int = 1,
    threads: Optional[int] = None,
) -> list[GridRow]:
    """
    alpha' over the cross product of (m, rho, c, d) with exchangeable correlation.

    Rows come back in (m, rho, c, d) order whatever the thread count.
    """
    cfg = SolverConfig(alpha=alpha, p=p)
    cells = [(m, rho, c, d) for m in m_list for rho in rho_list for c in c_list for d in d_list]
    workers = max(1, threads or settings.threads)
    logger.info("Solving alpha' grid", cells=len(cells), threads=workers)
    if workers == 1:
        return [_solve_cell(*cell, cfg) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cell: _solve_cell(*cell, cfg), cells))


def figure1_curve(
    m: int,
    rho: float,
    d: float,
    c_range: tuple[float, float] = (0.0, 5.0),
    alpha: float = 0.05,
    steps: int = 51,
) -> list[CurvePoint]:
    """Critical value t_{d,alpha'} over an evenly spaced grid of common margins."""
    c_lo, c_hi = c_range
    if not 0.0 <= c_lo <= c_hi <= 5.0:
        raise InvalidParameterError(
            "c_range must lie within [0, 5]", details={"c_range": list(c_range)}
        )
    if steps < 2:
        raise InvalidParameterError("steps must be at least 2", details={"steps": steps})
    cfg = SolverConfig(alpha=alpha)
    R = CorrelationMatrix.exchangeable(m, rho)
    curve = []
    for c in np.linspace(c_lo, c_hi, steps):
        solution = solve_adjusted_alpha(m, MarginVector.common(float(c), m), R, d, cfg)
        curve.append(CurvePoint(float(c), solution.critical_value))
    return curve


def write_grid_csv(
    rows: Iterable[Union[GridRow, Sequence]],
    path: Optional[Union[str, Path]] = None,
    digits: Optional[int] = None,
    header: Sequence[str] = GRID_COLUMNS,
    manifest: Optional[dict] = None,
) -> None:
    """Write grid rows (GridRow objects or plain tuples) with a header row."""
    values = [row.values() if isinstance(row, GridRow) else tuple(row) for row in rows]
    write_csv(header, values, path=path, digits=digits, manifest=manifest)
