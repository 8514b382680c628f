"""Correlated normal outcome data for simulated two-arm trials."""

from typing import Sequence, Union

import numpy as np

from supnoninf.core import InvalidParameterError
from supnoninf.mvt import CorrelationMatrix


def sample_mvn_group(
    n: int,
    mean: Sequence[float],
    sd: Sequence[float],
    R: Union[CorrelationMatrix, Sequence[Sequence[float]]],
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Draw ``n`` iid outcome vectors with the given means, SDs and correlation.

    Returns:
        (n, m) array; a zero SD gives a constant column
    """
    if n < 1:
        raise InvalidParameterError("group size must be at least 1", details={"n": n})
    matrix = R if isinstance(R, CorrelationMatrix) else CorrelationMatrix(np.asarray(R))
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    if mean.shape != (matrix.dim,) or sd.shape != (matrix.dim,):
        raise InvalidParameterError(
            "mean and sd must have one entry per endpoint",
            details={"m": matrix.dim, "mean": list(mean.shape), "sd": list(sd.shape)},
        )
    if np.any(sd < 0):
        raise InvalidParameterError("standard deviations must be nonnegative")
    z = rng.standard_normal((n, matrix.dim)) @ matrix.factor().T
    return mean + z * sd
