"""Tests for core exceptions, settings and logging."""

import logging

import pytest
from pydantic import ValidationError

from supnoninf.core import (
    AccuracyNotReachedError,
    ConvergenceError,
    InvalidParameterError,
    Settings,
    SpecValidationError,
    StructuredLogger,
    SupNonInfException,
    get_logger,
)
from supnoninf.mvt import ProbEstimate

pytestmark = pytest.mark.unit


class TestExceptions:
    """Test the error hierarchy and its JSON shape."""

    def test_base_exception_defaults(self):
        """Test that an empty exception still serializes."""
        exc = SupNonInfException()
        assert exc.to_dict() == {
            "error": "UNKNOWN_ERROR",
            "message": "An error occurred",
            "details": {},
        }

    def test_invalid_parameter_code(self):
        """Test the code attached to invalid arguments."""
        exc = InvalidParameterError("alpha out of range", details={"alpha": 2.0})
        payload = exc.to_dict()
        assert payload["error"] == "INVALID_PARAMETER"
        assert payload["details"] == {"alpha": 2.0}
        assert str(exc) == "alpha out of range"

    def test_accuracy_error_carries_best_estimate(self):
        """Test that the best estimate is exposed on the error."""
        best = ProbEstimate(0.25, 1e-3, "qmc")
        exc = AccuracyNotReachedError("budget exhausted", best_estimate=best)
        assert exc.best_estimate is best
        assert exc.details["value"] == pytest.approx(0.25)
        assert exc.details["abs_error"] == pytest.approx(1e-3)

    def test_convergence_error_bracket(self):
        """Test that the final bracket is reported."""
        exc = ConvergenceError("no convergence", bracket=(0.01, 0.02))
        assert exc.code == "NON_CONVERGENCE"
        assert exc.details["bracket"] == [0.01, 0.02]

    def test_spec_validation_lists_errors(self):
        """Test that every validation problem is kept."""
        errors = [
            {"pointer": "/alpha", "message": "bad"},
            {"pointer": "/margins/eta/1", "message": "negative"},
        ]
        exc = SpecValidationError(errors)
        assert exc.code == "VALIDATION_ERROR"
        assert exc.details["errors"] == errors
        assert "2 validation error" in exc.message

    def test_subclasses_share_base(self):
        """Test that callers can catch every error through the base class."""
        with pytest.raises(SupNonInfException):
            raise InvalidParameterError("x")


class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self):
        """Test default values."""
        s = Settings()
        assert s.schema_version == "1.0"
        assert s.zeta == pytest.approx(1e-5)
        assert s.max_iters == 200
        assert s.full_precision_digits == 17
        assert s.log_level == "WARNING"

    def test_env_override(self, monkeypatch):
        """Test that SUPNONINF_ variables override defaults."""
        monkeypatch.setenv("SUPNONINF_THREADS", "4")
        monkeypatch.setenv("SUPNONINF_ZETA", "1e-6")
        s = Settings()
        assert s.threads == 4
        assert s.zeta == pytest.approx(1e-6)

    def test_bootstrap_floor(self):
        """Test that fewer than 1000 bootstrap replicates are rejected."""
        with pytest.raises(ValidationError):
            Settings(boot_reps=500)

    def test_threads_positive(self):
        """Test a zero worker count."""
        with pytest.raises(ValidationError):
            Settings(threads=0)


class TestLogging:
    """Test the structured logger."""

    def test_get_logger_returns_structured(self):
        """Test logger type."""
        assert isinstance(get_logger("supnoninf.test"), StructuredLogger)

    def test_message_carries_context(self, caplog):
        """Test key=value context appended to messages."""
        logger = get_logger("supnoninf.test")
        with caplog.at_level(logging.INFO, logger="supnoninf.test"):
            logger.info("Solved", alpha_prime=0.01, iterations=12)
        assert "Solved | alpha_prime=0.01 iterations=12" in caplog.text

    def test_floats_are_compact(self, caplog):
        """Test six significant digits for float context."""
        logger = get_logger("supnoninf.test")
        with caplog.at_level(logging.INFO, logger="supnoninf.test"):
            logger.info("Bound", value=0.024987654321)
        assert "Bound | value=0.0249877" in caplog.text
