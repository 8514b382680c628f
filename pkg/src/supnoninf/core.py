"""Core configuration, logging, and exceptions."""

import logging
import sys
from typing import Any, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SupNonInfException(Exception):
    """Base exception for supnoninf."""

    def __init__(
        self,
        code: Optional[str] = None,
        message: Optional[str] = None,
        details: Optional[dict] = None,
    ):
        """
        Initialize SupNonInfException.

        Args:
            code: Error code
            message: Error message
            details: Additional error details
        """
        self.code = code
        self.message = message or "An error occurred"
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict:
        """Convert exception to dictionary format."""
        return {
            "error": self.code or "UNKNOWN_ERROR",
            "message": self.message,
            "details": self.details,
        }


class InvalidParameterError(SupNonInfException):
    """An argument is outside its mathematical domain."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(code="INVALID_PARAMETER", message=message, details=details)


class AccuracyNotReachedError(SupNonInfException):
    """Integration budget exhausted before the requested accuracy."""

    def __init__(self, message: str, best_estimate: Any = None, details: Optional[dict] = None):
        details = dict(details or {})
        if best_estimate is not None:
            details.setdefault("value", float(best_estimate.value))
            details.setdefault("abs_error", float(best_estimate.abs_error))
        super().__init__(code="ACCURACY_NOT_REACHED", message=message, details=details)
        self.best_estimate = best_estimate


class ConvergenceError(SupNonInfException):
    """Bisection did not converge within its iteration budget."""

    def __init__(self, message: str, bracket: tuple, details: Optional[dict] = None):
        details = dict(details or {})
        details["bracket"] = [float(bracket[0]), float(bracket[1])]
        super().__init__(code="NON_CONVERGENCE", message=message, details=details)
        self.bracket = bracket


class UnreachableTargetError(SupNonInfException):
    """A design target cannot be met inside the search range."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(code="UNREACHABLE_TARGET", message=message, details=details)


class DegenerateSampleError(SupNonInfException):
    """Resampled data kept a zero-variance endpoint after every retry."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(code="DEGENERATE_SAMPLE", message=message, details=details)


class SpecValidationError(SupNonInfException):
    """A spec document failed validation; every problem is listed."""

    def __init__(self, errors: list[dict]):
        super().__init__(
            code="VALIDATION_ERROR",
            message=f"{len(errors)} validation error(s)",
            details={"errors": errors},
        )
        self.errors = errors


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="SUPNONINF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_version: str = Field(default="0.1.0")
    schema_version: str = Field(default="1.0")
    log_level: str = Field(default="WARNING")

    # Bisection
    zeta: float = Field(default=1e-5)
    max_iters: int = Field(default=200)
    solver_cache_enabled: bool = Field(default=True)
    cache_round_digits: int = Field(default=6)

    # Lattice integration (general correlation)
    target_abs_err: float = Field(default=1e-6)
    qmc_randomizations: int = Field(default=12)
    qmc_max_points: int = Field(default=5_000_000)  # per randomization, summed over rounds
    qmc_seed: int = Field(default=20100908)

    # One-factor quadrature (exchangeable correlation)
    exch_abs_err: float = Field(default=1e-7)
    exch_max_nodes: int = Field(default=512)

    # Monte Carlo
    threads: int = Field(default=1, ge=1)
    mc_block_size: int = Field(default=50_000)

    # Comparators
    boot_reps: int = Field(default=1000, ge=1000)
    boot_max_retries: int = Field(default=10)
    ridge_scale: float = Field(default=1e-8)

    # Output
    output_sig_digits: int = Field(default=6)
    full_precision_digits: int = Field(default=17)

    # Design
    max_sample_size: int = Field(default=1_000_000)


# Global settings instance
settings = Settings()


def setup_logging(level: Optional[str] = None) -> None:
    """
    Setup logging configuration.

    Logs go to stderr; stdout carries JSON and CSV artifacts.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    log_level = level or settings.log_level

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


class StructuredLogger:
    """
    Logger wrapper rendering keyword context as ``msg | key=value ...``.

    Floats are shown with 6 significant digits.
    """

    def __init__(self, logger: logging.Logger):
        self._logger = logger

    @staticmethod
    def _render(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.6g}"
        return str(value)

    def _format_message(self, msg: str, **kwargs) -> str:
        if kwargs:
            context = " ".join(f"{k}={self._render(v)}" for k, v in kwargs.items())
            return f"{msg} | {context}"
        return msg

    def debug(self, msg: str, **kwargs) -> None:
        """Log debug message with structured data."""
        if self._logger.isEnabledFor(logging.DEBUG):
            self._logger.debug(self._format_message(msg, **kwargs))

    def info(self, msg: str, **kwargs) -> None:
        """Log info message with structured data."""
        self._logger.info(self._format_message(msg, **kwargs))

    def warning(self, msg: str, **kwargs) -> None:
        """Log warning message with structured data."""
        self._logger.warning(self._format_message(msg, **kwargs))

    def error(self, msg: str, **kwargs) -> None:
        """Log error message with structured data."""
        self._logger.error(self._format_message(msg, **kwargs))


def get_logger(name: str) -> StructuredLogger:
    """
    Get a structured logger instance.

    Args:
        name: Logger name (typically __name__)

    Returns:
        StructuredLogger instance
    """
    return StructuredLogger(logging.getLogger(name))
