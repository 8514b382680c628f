"""Tests for spec documents, validation and manifests."""

import copy

import pytest

from supnoninf.analysis import Decision, SEMode
from supnoninf.analysis.runner import analyze_spec, load_analysis_spec
from supnoninf.core import SpecValidationError
from supnoninf.power import EffectScale
from supnoninf.schemas import (
    PowerDocument,
    ScenarioFile,
    SimScenario,
    build_manifest,
    json_pointer,
    power_semantic_errors,
    validate_spec,
)

pytestmark = pytest.mark.unit


def _pointers(exc_info):
    return [error["pointer"] for error in exc_info.value.errors]


class TestJsonPointer:
    """Test pointer formatting."""

    def test_nested(self):
        """Test a nested location."""
        assert json_pointer(("margins", "eta", 1)) == "/margins/eta/1"

    def test_escapes(self):
        """Test RFC 6901 escaping."""
        assert json_pointer(("a/b", "c~d")) == "/a~1b/c~0d"

    def test_root(self):
        """Test the empty location."""
        assert json_pointer(()) == ""


class TestAnalysisSpec:
    """Test analysis document validation."""

    def test_valid_document(self, example1_spec_document):
        """Test that a valid document loads with the SE mode filled in."""
        spec = load_analysis_spec(example1_spec_document)
        assert spec.m == 2
        assert spec.modes.se_mode is SEMode.UNPOOLED
        assert spec.solver.zeta == pytest.approx(1e-5)

    def test_pooled_inferred(self, example2_spec_document):
        """Test pooled mode for SD-only endpoints."""
        assert load_analysis_spec(example2_spec_document).modes.se_mode is SEMode.POOLED

    def test_negative_eta_message(self, example1_spec_document):
        """Test the message for a negative non-inferiority margin."""
        document = copy.deepcopy(example1_spec_document)
        document["margins"]["eta"] = [1.0, -2.0]
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        error = exc_info.value.errors[0]
        assert error["pointer"] == "/margins/eta"
        assert "non-inferiority (eta_k) margin at index 1 must satisfy >= 0 (got -2.0)" in (
            error["message"]
        )

    def test_all_field_errors_reported(self, example1_spec_document):
        """Test that several problems come back together."""
        document = copy.deepcopy(example1_spec_document)
        document["alpha"] = 1.5
        document["endpoints"][0]["n_trt"] = 1
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert set(_pointers(exc_info)) >= {"/alpha", "/endpoints/0/n_trt"}

    def test_margin_count(self, example1_spec_document):
        """Test margins for the wrong number of endpoints."""
        document = copy.deepcopy(example1_spec_document)
        document["margins"] = {"epsilon": [0.0], "eta": [1.0]}
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert "/margins" in _pointers(exc_info)

    def test_missing_covariances(self, example1_spec_document):
        """Test the pooled source without covariances."""
        document = copy.deepcopy(example1_spec_document)
        document["correlation"] = {"source": "pooled_matrix"}
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert {"/correlation/cov_trt", "/correlation/cov_ctl"} <= set(_pointers(exc_info))

    def test_both_inputs(self, example1_spec_document):
        """Test endpoints and raw_data together."""
        document = copy.deepcopy(example1_spec_document)
        document["raw_data"] = "data.csv"
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert "/endpoints" in _pointers(exc_info)

    def test_p_above_m(self, example1_spec_document):
        """Test p larger than the endpoint count."""
        document = dict(example1_spec_document, p=3)
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert "/p" in _pointers(exc_info)

    def test_matrix_shape(self, example2_spec_document):
        """Test a matrix of the wrong size."""
        document = copy.deepcopy(example2_spec_document)
        document["correlation"]["matrix"] = [[1.0, 0.2], [0.2, 1.0]]
        with pytest.raises(SpecValidationError) as exc_info:
            load_analysis_spec(document)
        assert "/correlation/matrix" in _pointers(exc_info)


class TestAnalyzeSpec:
    """Test running documents end to end."""

    def test_summary_document(self, example1_spec_document):
        """Test the two-endpoint document."""
        result = analyze_spec(load_analysis_spec(example1_spec_document))
        assert result.decisions == [Decision.SUPERIOR, Decision.NONINFERIOR_ONLY]

    def test_raw_document_relative_path(self, raw_trial_csv):
        """Test a raw-data CSV resolved next to the spec."""
        document = {
            "raw_data": raw_trial_csv.name,
            "margins": {"epsilon": [0.0, 0.0], "eta": [0.5, 0.5]},
        }
        spec = load_analysis_spec(document)
        assert spec.modes.se_mode is SEMode.UNPOOLED
        result = analyze_spec(spec, base_dir=raw_trial_csv.parent)
        assert result.endpoints == ["score_a", "score_b"]
        assert result.df_used == 38


class TestPowerDocument:
    """Test power documents."""

    def test_defaults(self):
        """Test defaults and conversion."""
        doc = PowerDocument(theta1=[0.4, 0.0], margins={"epsilon": [0, 0], "eta": [0.5, 0.5]})
        spec = doc.to_power_spec()
        assert spec.scale is EffectScale.EFFECT_SIZE
        assert spec.R.exchangeable_rho() == 0.0
        assert doc.mc_reps == 100_000

    def test_semantic_errors(self):
        """Test cross-field checks."""
        doc = PowerDocument(
            theta1=[0.4, 0.0],
            margins={"epsilon": [0], "eta": [0.5]},
            rho=0.5,
            matrix=[[1.0, 0.5], [0.5, 1.0]],
            scale="outcome",
            p=3,
        )
        pointers = {error["pointer"] for error in power_semantic_errors(doc)}
        assert pointers == {"/margins", "/matrix", "/sd", "/p"}

    def test_validate_spec_with_checks(self):
        """Test validation with semantic checks."""
        with pytest.raises(SpecValidationError):
            validate_spec(
                {"theta1": [0.1], "margins": {"epsilon": [0, 0], "eta": [1, 1]}},
                PowerDocument,
                power_semantic_errors,
            )


class TestScenarioDocuments:
    """Test simulation scenario documents."""

    def test_eta_from_combined_margin(self):
        """Test eta = margin_c - epsilon."""
        scenario = SimScenario(theta=[0.0, 0.0], margin_c=0.5, epsilon=0.2)
        assert scenario.eta == pytest.approx(0.3)

    def test_theta_length(self):
        """Test theta of the wrong length."""
        with pytest.raises(ValueError):
            SimScenario(m=3, theta=[0.0, 0.0], margin_c=0.2)

    def test_rho_lower_limit(self):
        """Test rho below -1/(m-1)."""
        with pytest.raises(ValueError):
            SimScenario(m=3, theta=[0.0] * 3, margin_c=0.2, rho=-0.6)

    def test_epsilon_above_margin(self):
        """Test epsilon larger than the combined margin."""
        with pytest.raises(ValueError):
            SimScenario(theta=[0.0, 0.0], margin_c=0.2, epsilon=0.3)

    def test_scenario_file_pointers(self):
        """Test pointers into a list of scenarios."""
        with pytest.raises(SpecValidationError) as exc_info:
            validate_spec([{"theta": [0, 0], "margin_c": 0.2}, {"theta": [0, 0]}], ScenarioFile)
        assert "/1/margin_c" in _pointers(exc_info)


class TestManifest:
    """Test run manifests."""

    def test_digest_and_versions(self):
        """Test reproducible digests and recorded versions."""
        a = build_manifest("table1", {"alpha": 0.05, "m": [2, 3]}, seed=1)
        b = build_manifest("table1", {"m": [2, 3], "alpha": 0.05}, seed=1)
        assert a.parameters_digest == b.parameters_digest
        assert set(a.versions) == {"supnoninf", "schema", "numpy", "scipy"}
        assert a.model_dump(mode="json")["command"] == "table1"
