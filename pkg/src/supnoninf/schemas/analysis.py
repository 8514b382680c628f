"""Analysis spec documents."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from supnoninf.analysis.service import CorrelationSource
from supnoninf.analysis.statistics import DFMode, Direction, SEMode


class EndpointDocument(BaseModel):
    """Summary statistics of one endpoint."""

    name: Optional[str] = Field(None, description="Endpoint label")
    mean_trt: float = Field(..., description="Treatment-group mean")
    mean_ctl: float = Field(..., description="Control-group mean")
    n_trt: int = Field(..., description="Treatment-group size", ge=2)
    n_ctl: int = Field(..., description="Control-group size", ge=2)
    var_trt: Optional[float] = Field(None, description="Treatment-group variance", ge=0)
    var_ctl: Optional[float] = Field(None, description="Control-group variance", ge=0)
    pooled_sd: Optional[float] = Field(None, description="Pooled standard deviation", ge=0)
    direction: Direction = Field(Direction.HIGHER_IS_BETTER, description="Direction of benefit")


def _nonnegative(values: List[float], label: str) -> List[float]:
    for k, value in enumerate(values):
        if not value >= 0:
            raise ValueError(f"{label} margin at index {k} must satisfy >= 0 (got {value})")
    return values


class MarginsDocument(BaseModel):
    """Superiority (epsilon_k >= 0) and non-inferiority (eta_k >= 0) margins, outcome units."""

    epsilon: List[float] = Field(..., description="Superiority margins, epsilon_k >= 0")
    eta: List[float] = Field(..., description="Non-inferiority margins, eta_k >= 0")

    @field_validator("epsilon")
    @classmethod
    def _epsilon_nonnegative(cls, values: List[float]) -> List[float]:
        return _nonnegative(values, "superiority (epsilon_k)")

    @field_validator("eta")
    @classmethod
    def _eta_nonnegative(cls, values: List[float]) -> List[float]:
        return _nonnegative(values, "non-inferiority (eta_k)")


class CorrelationDocument(BaseModel):
    """Where the correlation of the test statistics comes from."""

    source: CorrelationSource = Field(CorrelationSource.POOLED_MATRIX)
    matrix: Optional[List[List[float]]] = Field(None, description="Correlation matrix")
    cov_trt: Optional[List[List[float]]] = Field(None, description="Treatment covariance")
    cov_ctl: Optional[List[List[float]]] = Field(None, description="Control covariance")
    rho0: Optional[float] = Field(None, description="Common correlation", ge=-1, le=1)


class ModesDocument(BaseModel):
    se_mode: Optional[SEMode] = Field(None, description="Inferred from the supplied fields")
    df_mode: DFMode = Field(DFMode.PER_ENDPOINT)


class SolverDocument(BaseModel):
    zeta: float = Field(1e-5, description="Bisection precision", gt=0)
    max_iters: int = Field(200, description="Bisection iteration limit", ge=1)


class AnalysisSpec(BaseModel):
    """Analysis request: endpoint summaries or a raw-data CSV, margins and options."""

    endpoints: Optional[List[EndpointDocument]] = Field(None, description="Endpoint summaries")
    raw_data: Optional[str] = Field(None, description="Path to a per-subject CSV")
    treatment_label: str = Field("treatment", description="Group label of the treatment arm")
    control_label: str = Field("control", description="Group label of the control arm")
    directions: Optional[List[Direction]] = Field(None, description="Directions for raw data")
    margins: MarginsDocument
    alpha: float = Field(0.025, description="Overall one-sided level", gt=0, lt=1)
    p: int = Field(1, description="Endpoints required to be superior", ge=1)
    correlation: CorrelationDocument = Field(default_factory=CorrelationDocument)
    modes: ModesDocument = Field(default_factory=ModesDocument)
    solver: SolverDocument = Field(default_factory=SolverDocument)

    @property
    def m(self) -> Optional[int]:
        if self.endpoints is not None:
            return len(self.endpoints)
        return len(self.margins.eta)


def _square(matrix: List[List[float]], m: Optional[int]) -> bool:
    return len(matrix) == m and all(len(row) == m for row in matrix)


def analysis_semantic_errors(spec: AnalysisSpec) -> List[Dict[str, str]]:
    """Cross-field checks; fills in the inferred SE mode when the spec is valid."""
    errors: List[Dict[str, str]] = []

    def add(pointer: str, message: str) -> None:
        errors.append({"pointer": pointer, "message": message})

    if (spec.endpoints is None) == (spec.raw_data is None):
        add("/endpoints", "exactly one of endpoints or raw_data must be given")
    m = spec.m
    if len(spec.margins.epsilon) != len(spec.margins.eta):
        add("/margins", "epsilon and eta must have equal length")
    if spec.endpoints is not None:
        if len(spec.margins.eta) != m:
            add("/margins", f"margins must have one entry per endpoint ({m})")
        for k, endpoint in enumerate(spec.endpoints):
            has_vars = endpoint.var_trt is not None and endpoint.var_ctl is not None
            if (endpoint.var_trt is None) != (endpoint.var_ctl is None):
                add(f"/endpoints/{k}", "var_trt and var_ctl must be supplied together")
            if not has_vars and endpoint.pooled_sd is None:
                add(f"/endpoints/{k}", "either group variances or pooled_sd is required")
            if spec.modes.se_mode is SEMode.UNPOOLED and not has_vars:
                add(f"/endpoints/{k}", "unpooled se_mode needs var_trt and var_ctl")
        sizes = {(e.n_trt, e.n_ctl) for e in spec.endpoints}
        if len(sizes) > 1:
            add("/endpoints", "group sizes must agree across endpoints")
    if spec.directions is not None and len(spec.directions) != m:
        add("/directions", "one direction per endpoint is required")
    if m is not None and spec.p > m:
        add("/p", f"p must not exceed the number of endpoints ({m})")

    corr = spec.correlation
    source = corr.source
    summary_input = spec.endpoints is not None
    if source is CorrelationSource.SUPPLIED_MATRIX and corr.matrix is None:
        add("/correlation/matrix", "supplied_matrix needs a matrix")
    if source is CorrelationSource.POOLED_MATRIX and summary_input:
        if corr.cov_trt is None:
            add("/correlation/cov_trt", "pooled_matrix needs cov_trt for summary input")
        if corr.cov_ctl is None:
            add("/correlation/cov_ctl", "pooled_matrix needs cov_ctl for summary input")
    if source is CorrelationSource.RHO0_EXCHANGEABLE and summary_input:
        if corr.rho0 is None and corr.matrix is None and (corr.cov_trt is None or corr.cov_ctl is None):
            add("/correlation", "rho0_exchangeable needs rho0, a matrix or both covariances")
    for name in ("matrix", "cov_trt", "cov_ctl"):
        value = getattr(corr, name)
        if value is not None and not _square(value, m):
            add(f"/correlation/{name}", f"must be a {m} x {m} matrix")

    if not errors and spec.modes.se_mode is None:
        if spec.endpoints is None or all(
            e.var_trt is not None and e.var_ctl is not None for e in spec.endpoints
        ):
            spec.modes.se_mode = SEMode.UNPOOLED
        else:
            spec.modes.se_mode = SEMode.POOLED
    return errors
