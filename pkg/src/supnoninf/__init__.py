"""supnoninf - Unified superiority and non-inferiority testing on multiple correlated endpoints."""

__version__ = "0.1.0"

from supnoninf.core import SupNonInfException, get_logger, settings, setup_logging

__all__ = [
    "__version__",
    "SupNonInfException",
    "get_logger",
    "settings",
    "setup_logging",
]
