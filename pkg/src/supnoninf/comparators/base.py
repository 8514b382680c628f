"""Base interface for two-group multi-endpoint tests."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.analysis.statistics import MarginSpec
from supnoninf.core import InvalidParameterError
from supnoninf.mvt import t_quantile


class Method(str, Enum):
    """Test procedures available to the simulation harness."""

    UNIFIED = "UNIFIED"
    TL = "TL"
    BLT = "BLT"
    PW = "PW"


@dataclass
class ComparatorDecision:
    """Rejection of the global null with the statistics behind it."""

    method: Method
    reject_h0: bool
    statistics: Dict[str, float] = field(default_factory=dict)
    critical_values: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "reject_h0": self.reject_h0,
            "statistics": self.statistics,
            "critical_values": self.critical_values,
            "diagnostics": self.diagnostics,
        }


class BaseComparator(ABC):
    """Abstract base class for tests applied to benefit-oriented raw data."""

    method: Method

    def __init__(self, margins: MarginSpec, alpha: float = 0.05):
        """
        Initialize the test.

        Args:
            margins: Superiority and non-inferiority margins in data units
            alpha: Overall one-sided level
        """
        if not 0.0 < alpha < 1.0:
            raise InvalidParameterError("alpha must lie in (0, 1)", details={"alpha": alpha})
        self.margins = margins
        self.alpha = alpha

    def _check(self, data: TwoGroupSample) -> None:
        if data.m != self.margins.dim:
            raise InvalidParameterError(
                "data and margin dimensions differ",
                details={"data": data.m, "margins": self.margins.dim},
            )

    def gate_value(self, df: int) -> float:
        """t_{d,alpha}, the non-inferiority gate shared by the comparators."""
        return t_quantile(self.alpha, df)

    @abstractmethod
    def decide(self, data: TwoGroupSample, seed: Optional[int] = None) -> ComparatorDecision:
        """
        Test the global null on one data set.

        Args:
            data: Benefit-oriented two-group sample
            seed: Seed for any resampling

        Returns:
            ComparatorDecision
        """
        pass
