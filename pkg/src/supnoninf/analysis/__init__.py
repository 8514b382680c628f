"""Trial analysis from summary statistics or raw per-subject data."""

from .ingestion import TwoGroupSample, load_raw_csv, summaries_from_raw
from .service import (
    CorrelationSource,
    CoverageResult,
    Decision,
    TrialResult,
    analyze,
    decide,
    resolve_correlation,
    simulate_ci_coverage,
)
from .statistics import (
    DFMode,
    Direction,
    EndpointSummary,
    MarginSpec,
    SEMode,
    armitage_parmar_rho0,
    degrees_of_freedom,
    infer_se_mode,
    pooled_correlation,
    simultaneous_ci,
    standard_errors,
    standardize_margins,
    t_statistics,
)

__all__ = [
    "CorrelationSource",
    "CoverageResult",
    "DFMode",
    "Decision",
    "Direction",
    "EndpointSummary",
    "MarginSpec",
    "SEMode",
    "TrialResult",
    "TwoGroupSample",
    "analyze",
    "armitage_parmar_rho0",
    "decide",
    "degrees_of_freedom",
    "infer_se_mode",
    "load_raw_csv",
    "pooled_correlation",
    "resolve_correlation",
    "simulate_ci_coverage",
    "simultaneous_ci",
    "standard_errors",
    "standardize_margins",
    "summaries_from_raw",
    "t_statistics",
]
