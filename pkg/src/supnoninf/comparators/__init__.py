"""Benchmark multi-endpoint tests and the unified test on raw two-group data."""

from .base import BaseComparator, ComparatorDecision, Method
from .blt import BLTComparator, blt_test
from .pw import (
    PWComparator,
    orthant_projection_distance,
    pw_critical_value,
    pw_mixture_tail,
    pw_test,
)
from .tl import TLComparator, tl_test
from .unified import UnifiedComparator

__all__ = [
    "BLTComparator",
    "BaseComparator",
    "ComparatorDecision",
    "Method",
    "PWComparator",
    "TLComparator",
    "UnifiedComparator",
    "blt_test",
    "orthant_projection_distance",
    "pw_critical_value",
    "pw_mixture_tail",
    "pw_test",
    "tl_test",
]
