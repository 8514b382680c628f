"""Univariate Student t tails and quantiles."""

import math
from typing import Union

import numpy as np
from scipy import special, stats

from supnoninf.core import InvalidParameterError

ArrayLike = Union[float, np.ndarray]


def check_df(d: float) -> None:
    """Raise unless ``d`` is a valid (possibly infinite) degrees of freedom."""
    if not (isinstance(d, (int, float, np.integer, np.floating)) and d > 0):
        raise InvalidParameterError(
            "degrees of freedom must be positive", details={"d": repr(d)}
        )


def t_tail(a: ArrayLike, d: float) -> ArrayLike:
    """
    Upper-tail probability P(T > a) of a central t variate.

    ``d = inf`` gives the standard normal tail. Accepts scalars or arrays;
    scalars return a Python float.

    Args:
        a: Threshold(s), infinite values allowed
        d: Degrees of freedom

    Returns:
        Tail probability
    """
    check_df(d)
    values = np.asarray(a, dtype=np.float64)
    if math.isinf(d):
        tail = special.ndtr(-values)
    else:
        tail = stats.t.sf(values, d)
    if tail.ndim == 0:
        return float(tail)
    return tail


def t_quantile(p: float, d: float) -> float:
    """
    Upper percentage point ``a`` with ``t_tail(a, d) == p``.

    Args:
        p: Upper-tail probability in (0, 1)
        d: Degrees of freedom

    Returns:
        The critical value t_{d,p}
    """
    check_df(d)
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(
            "tail probability must lie strictly between 0 and 1", details={"p": p}
        )
    if p == 0.5:
        return 0.0
    if math.isinf(d):
        return float(stats.norm.isf(p))
    return float(stats.t.isf(p, d))
