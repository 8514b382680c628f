"""Power and sample-size spec documents."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from supnoninf.analysis.statistics import DFMode, MarginSpec
from supnoninf.mvt import CorrelationMatrix
from supnoninf.power import EffectScale, PowerSpec
from supnoninf.schemas.analysis import MarginsDocument


class PowerDocument(BaseModel):
    """Design assumptions for ``power`` and ``sample-size``."""

    theta1: List[float] = Field(..., description="Assumed true effects under the alternative")
    margins: MarginsDocument
    rho: Optional[float] = Field(None, description="Common correlation", ge=-1, le=1)
    matrix: Optional[List[List[float]]] = Field(None, description="Full correlation matrix")
    n_trt: int = Field(100, description="Treatment-group size", ge=2)
    n_ctl: int = Field(100, description="Control-group size", ge=2)
    sd: Optional[List[float]] = Field(None, description="Outcome SDs (outcome scale only)")
    alpha: float = Field(0.05, description="Overall one-sided level", gt=0, lt=1)
    p: int = Field(1, description="Endpoints required to be superior", ge=1)
    scale: EffectScale = Field(EffectScale.EFFECT_SIZE)
    df_mode: DFMode = Field(DFMode.PER_ENDPOINT)
    target_power: Optional[float] = Field(None, description="Sample-size target", gt=0, lt=1)
    allocation_ratio: float = Field(1.0, description="n_trt / n_ctl", gt=0)
    max_n: Optional[int] = Field(None, description="Sample-size search limit", ge=2)
    mc_reps: int = Field(100_000, description="Monte Carlo replicates for p > 1", ge=1)
    seed: int = Field(0, description="Monte Carlo seed")

    def correlation(self) -> CorrelationMatrix:
        if self.matrix is not None:
            return CorrelationMatrix(self.matrix)
        return CorrelationMatrix.exchangeable(len(self.theta1), self.rho or 0.0)

    def to_power_spec(self) -> PowerSpec:
        return PowerSpec(
            theta1=self.theta1,
            margins=MarginSpec(tuple(self.margins.epsilon), tuple(self.margins.eta)),
            R=self.correlation(),
            n_trt=self.n_trt,
            n_ctl=self.n_ctl,
            sd=self.sd,
            alpha=self.alpha,
            p=self.p,
            scale=self.scale,
            df_mode=self.df_mode,
        )


def power_semantic_errors(spec: PowerDocument) -> List[Dict[str, str]]:
    errors: List[Dict[str, str]] = []
    m = len(spec.theta1)
    if len(spec.margins.epsilon) != m or len(spec.margins.eta) != m:
        errors.append({"pointer": "/margins", "message": f"margins must have {m} entries"})
    if spec.rho is not None and spec.matrix is not None:
        errors.append({"pointer": "/matrix", "message": "give rho or matrix, not both"})
    if spec.matrix is not None and (
        len(spec.matrix) != m or any(len(row) != m for row in spec.matrix)
    ):
        errors.append({"pointer": "/matrix", "message": f"must be a {m} x {m} matrix"})
    if spec.scale is EffectScale.OUTCOME and (spec.sd is None or len(spec.sd) != m):
        errors.append({"pointer": "/sd", "message": "outcome scale needs one sd per endpoint"})
    if spec.p > m:
        errors.append({"pointer": "/p", "message": f"p must not exceed {m}"})
    return errors
