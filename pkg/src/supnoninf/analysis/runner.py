"""Run an analysis described by a validated AnalysisSpec document."""

from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from supnoninf.analysis.ingestion import load_raw_csv, summaries_from_raw
from supnoninf.analysis.service import TrialResult, analyze
from supnoninf.analysis.statistics import EndpointSummary, MarginSpec
from supnoninf.mvt import CorrelationMatrix
from supnoninf.schemas.analysis import AnalysisSpec, analysis_semantic_errors
from supnoninf.schemas.validation import validate_spec


def load_analysis_spec(document: Any) -> AnalysisSpec:
    return validate_spec(document, AnalysisSpec, analysis_semantic_errors)


def _array(values: Optional[list]) -> Optional[np.ndarray]:
    return None if values is None else np.array(values, dtype=np.float64)


def analyze_spec(spec: AnalysisSpec, base_dir: Optional[Union[str, Path]] = None) -> TrialResult:
    """
    Analyze summary statistics or a raw-data CSV as the spec prescribes.

    A relative ``raw_data`` path is resolved against ``base_dir``, normally
    the directory of the spec file.
    """
    corr = spec.correlation
    cov_trt, cov_ctl = _array(corr.cov_trt), _array(corr.cov_ctl)
    if spec.endpoints is not None:
        summaries = [
            EndpointSummary(**endpoint.model_dump(exclude={"name"}), name=endpoint.name)
            for endpoint in spec.endpoints
        ]
    else:
        path = Path(spec.raw_data)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        sample = load_raw_csv(path, spec.treatment_label, spec.control_label)
        summaries, raw_trt, raw_ctl = summaries_from_raw(sample, directions=spec.directions)
        if cov_trt is None and cov_ctl is None:
            cov_trt, cov_ctl = raw_trt, raw_ctl

    return analyze(
        summaries,
        MarginSpec(tuple(spec.margins.epsilon), tuple(spec.margins.eta)),
        alpha=spec.alpha,
        p=spec.p,
        correlation_source=corr.source,
        se_mode=spec.modes.se_mode,
        df_mode=spec.modes.df_mode,
        R=CorrelationMatrix(corr.matrix) if corr.matrix is not None else None,
        cov_trt=cov_trt,
        cov_ctl=cov_ctl,
        rho0=corr.rho0,
        zeta=spec.solver.zeta,
        max_iters=spec.solver.max_iters,
    )
