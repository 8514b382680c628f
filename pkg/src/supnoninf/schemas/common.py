"""Run manifest embedded in every output artifact."""

from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np
import scipy
from pydantic import BaseModel, Field

from supnoninf.core import settings
from supnoninf.utils.hash_utils import compute_parameters_digest


class RunManifest(BaseModel):
    """What produced an artifact, so it can be regenerated."""

    command: str = Field(..., description="Subcommand that produced the artifact")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Resolved parameters")
    parameters_digest: str = Field(..., description="SHA256 of the canonical parameter JSON")
    versions: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None
    timestamp: datetime


def tool_versions() -> Dict[str, str]:
    return {
        "supnoninf": settings.app_version,
        "schema": settings.schema_version,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def build_manifest(
    command: str, parameters: Dict[str, Any], seed: Optional[int] = None
) -> RunManifest:
    """
    Build the manifest for one command run.

    Args:
        command: Subcommand name
        parameters: Fully resolved parameters (defaults included)
        seed: Seed driving any randomized step

    Returns:
        RunManifest
    """
    return RunManifest(
        command=command,
        parameters=parameters,
        parameters_digest=compute_parameters_digest(parameters),
        versions=tool_versions(),
        seed=seed,
        timestamp=datetime.now(timezone.utc),
    )
