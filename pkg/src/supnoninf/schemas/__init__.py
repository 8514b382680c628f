"""Input documents, run manifests and spec validation."""

from .analysis import AnalysisSpec, analysis_semantic_errors
from .common import RunManifest, build_manifest, tool_versions
from .design import PowerDocument, power_semantic_errors
from .simulation import DesignMarginScale, ScenarioFile, SimScenario
from .validation import json_pointer, pointer_errors, validate_spec

__all__ = [
    "AnalysisSpec",
    "DesignMarginScale",
    "PowerDocument",
    "RunManifest",
    "ScenarioFile",
    "SimScenario",
    "analysis_semantic_errors",
    "build_manifest",
    "json_pointer",
    "pointer_errors",
    "power_semantic_errors",
    "tool_versions",
    "validate_spec",
]
