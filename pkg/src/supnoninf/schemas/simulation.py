"""Simulation scenario documents."""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, RootModel, model_validator

from supnoninf.comparators.base import Method


class DesignMarginScale(str, Enum):
    """
    How ``margin_c`` enters the alpha' solve.

    ``effect``: margin_c is in SD units and is standardized by
    sqrt(1/n_trt + 1/n_ctl). ``nominal``: margin_c is used directly as the
    SE-scale c_k while the generated data still use SD-scale margins, so the
    solved alpha' does not hold the level. ``nominal`` is a diagnostic only.
    """

    EFFECT = "effect"
    NOMINAL = "nominal"


class SimScenario(BaseModel):
    """One cell of a simulation study (effects and margins in SD units)."""

    scenario_id: str = Field("scenario", description="Label carried into the report")
    m: int = Field(2, description="Number of endpoints", ge=1)
    rho: float = Field(0.0, description="Common correlation of the outcomes", ge=-1, le=1)
    theta: List[float] = Field(..., description="True mean differences, SD units")
    margin_c: float = Field(..., description="Combined margin epsilon + eta, SD units", ge=0)
    epsilon: float = Field(0.0, description="Superiority margin, SD units", ge=0)
    n_trt: int = Field(100, description="Treatment-group size", ge=2)
    n_ctl: int = Field(100, description="Control-group size", ge=2)
    alpha: float = Field(0.05, description="Overall one-sided level", gt=0, lt=1)
    reps: int = Field(10_000, description="Simulated trials", ge=1)
    seed: int = Field(20100908, description="Scenario seed", ge=0)
    methods: List[Method] = Field(default_factory=lambda: list(Method))
    design_margin_scale: DesignMarginScale = Field(DesignMarginScale.EFFECT)
    plug_in_alpha: bool = Field(False, description="Re-solve alpha' on every replicate")
    boot_reps: Optional[int] = Field(None, description="Bootstrap replicates (TL, BLT)", ge=1)
    threads: Optional[int] = Field(None, description="Worker threads", ge=1)

    @model_validator(mode="after")
    def _check_geometry(self) -> "SimScenario":
        if len(self.theta) != self.m:
            raise ValueError(f"theta must have m = {self.m} entries")
        if self.m > 1 and self.rho < -1.0 / (self.m - 1):
            raise ValueError(f"rho must be at least -1/(m-1) = {-1.0 / (self.m - 1):.6g}")
        if self.epsilon > self.margin_c:
            raise ValueError("epsilon must not exceed margin_c")
        if not self.methods:
            raise ValueError("at least one method is required")
        return self

    @property
    def eta(self) -> float:
        return self.margin_c - self.epsilon


class ScenarioFile(RootModel[List[SimScenario]]):
    """A ``simulate`` input file: a JSON list of scenarios."""
