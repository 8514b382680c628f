"""Value types shared by the multivariate t kernels."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from supnoninf.core import InvalidParameterError

PSD_TOLERANCE = 1e-10

PROB_METHODS = ("quadrature", "qmc", "closed_form")


def _readonly(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Symmetric, unit-diagonal, positive-semidefinite correlation matrix."""

    entries: np.ndarray

    def __post_init__(self):
        values = np.array(self.entries, dtype=np.float64)
        if values.ndim == 0:
            values = values.reshape(1, 1)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] == 0:
            raise InvalidParameterError(
                "correlation matrix must be a non-empty square matrix",
                details={"shape": list(values.shape)},
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("correlation matrix entries must be finite")
        if not np.allclose(values, values.T, atol=PSD_TOLERANCE, rtol=0.0):
            raise InvalidParameterError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(values), 1.0, atol=PSD_TOLERANCE, rtol=0.0):
            raise InvalidParameterError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(values) > 1.0 + PSD_TOLERANCE):
            raise InvalidParameterError("correlations must lie in [-1, 1]")

        values = (values + values.T) / 2.0
        np.fill_diagonal(values, 1.0)
        min_eig = float(np.linalg.eigvalsh(values).min())
        if min_eig < -PSD_TOLERANCE:
            raise InvalidParameterError(
                "correlation matrix is not positive semidefinite",
                details={"min_eigenvalue": min_eig},
            )
        object.__setattr__(self, "entries", _readonly(values))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, m: int) -> "CorrelationMatrix":
        return cls(np.eye(m))

    @classmethod
    def exchangeable(cls, m: int, rho: float) -> "CorrelationMatrix":
        """Build the matrix with every off-diagonal entry equal to ``rho``."""
        if m < 1:
            raise InvalidParameterError("dimension must be at least 1", details={"m": m})
        if m > 1 and not (-1.0 / (m - 1) - PSD_TOLERANCE <= rho <= 1.0):
            raise InvalidParameterError(
                "exchangeable correlation outside its valid range",
                details={"m": m, "rho": rho, "lower_limit": -1.0 / (m - 1)},
            )
        values = np.full((m, m), float(rho))
        np.fill_diagonal(values, 1.0)
        return cls(values)

    def exchangeable_rho(self, tol: float = 1e-12) -> Optional[float]:
        """Common off-diagonal value, or None when the entries differ."""
        if self.dim == 1:
            return 0.0
        off = self.entries[~np.eye(self.dim, dtype=bool)]
        if float(off.max() - off.min()) <= tol:
            return float(off.mean())
        return None

    def submatrix(self, index: Sequence[int]) -> "CorrelationMatrix":
        idx = np.asarray(index, dtype=int)
        return CorrelationMatrix(self.entries[np.ix_(idx, idx)])

    def factor(self) -> np.ndarray:
        """Lower factor L with L @ L.T == entries (eigen fallback when singular)."""
        try:
            return np.linalg.cholesky(self.entries)
        except np.linalg.LinAlgError:
            eigvals, eigvecs = np.linalg.eigh(self.entries)
            return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))

    def cache_key(self, digits: int) -> tuple:
        return tuple(np.round(self.entries, digits).ravel().tolist())

    def to_list(self) -> list[list[float]]:
        return self.entries.tolist()

    def __repr__(self) -> str:
        return f"<CorrelationMatrix(dim={self.dim})>"


@dataclass(frozen=True, eq=False)
class Rectangle:
    """Integration box ``lower < T < upper`` with infinite bounds allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.array(self.lower, dtype=np.float64))
        upper = np.atleast_1d(np.array(self.upper, dtype=np.float64))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise InvalidParameterError(
                "rectangle bounds must be vectors of equal length",
                details={"lower": list(lower.shape), "upper": list(upper.shape)},
            )
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise InvalidParameterError("rectangle bounds must not be NaN")
        if np.any(lower > upper):
            raise InvalidParameterError("rectangle requires lower <= upper")
        object.__setattr__(self, "lower", _readonly(lower))
        object.__setattr__(self, "upper", _readonly(upper))

    @property
    def dim(self) -> int:
        return int(self.lower.shape[0])

    @classmethod
    def upper_orthant(cls, bounds: Sequence[float]) -> "Rectangle":
        lower = np.asarray(bounds, dtype=np.float64)
        return cls(lower, np.full_like(lower, np.inf))


@dataclass(frozen=True)
class ProbEstimate:
    """Probability with an absolute error estimate and the method used."""

    value: float
    abs_error: float
    method: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in PROB_METHODS:
            raise InvalidParameterError(f"unknown probability method: {self.method}")
        object.__setattr__(self, "value", float(min(max(self.value, 0.0), 1.0)))
        object.__setattr__(self, "abs_error", float(max(self.abs_error, 0.0)))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "abs_error": self.abs_error,
            "method": self.method,
            **({"details": self.details} if self.details else {}),
        }
