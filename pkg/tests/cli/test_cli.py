"""Tests for the command-line interface."""

import json

import pytest
from typer.testing import CliRunner

from supnoninf.cli import app
from supnoninf.comparators import UnifiedComparator
from supnoninf.core import DegenerateSampleError

pytestmark = pytest.mark.cli

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, ["--quiet", *args])


def stdout_json(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


@pytest.fixture
def matrix_csv(tmp_path, example2_correlation):
    path = tmp_path / "corr.csv"
    lines = ["a,b,c,d"] + [",".join(f"{v:g}" for v in row) for row in example2_correlation.to_list()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def design_document():
    return {
        "theta1": [0.4, 0.0],
        "margins": {"epsilon": [0.0, 0.0], "eta": [0.5, 0.5]},
        "rho": 0.0,
    }


class TestVersionAndSchema:
    """Test informational commands."""

    def test_version(self):
        """Test the version document."""
        data = stdout_json(invoke("version"))
        assert data["supnoninf"] == "0.1.0"
        assert "scipy" in data

    def test_schema(self):
        """Test the JSON Schema of a power document."""
        data = stdout_json(invoke("schema", "--kind", "power"))
        assert "theta1" in data["properties"]

    def test_schema_unknown_kind(self):
        """Test an unknown document kind."""
        assert invoke("schema", "--kind", "nope").exit_code == 2


class TestAdjustAlpha:
    """Test the alpha' command."""

    def test_zero_margin(self):
        """Test alpha / m with a manifest."""
        data = stdout_json(invoke("adjust-alpha", "--m", "2", "--c", "0", "--d", "20"))
        assert data["alpha_prime"] == pytest.approx(0.025)
        assert data["boundary"] == "alpha_over_m"
        assert data["manifest"]["command"] == "adjust-alpha"
        assert len(data["manifest"]["parameters_digest"]) == 64

    def test_published_cell(self):
        """Test one cell of the alpha' table."""
        data = stdout_json(
            invoke("adjust-alpha", "--m", "2", "--rho", "0", "--c", "1", "--d", "10")
        )
        assert data["alpha_prime"] == pytest.approx(0.0423, abs=1e-3)

    def test_diagnostics_history(self):
        """Test the bisection trace under --diagnostics."""
        result = runner.invoke(
            app, ["-q", "--diagnostics", "adjust-alpha", "--m", "2", "--c", "1", "--d", "10"]
        )
        assert "history" in stdout_json(result)

    def test_full_precision(self):
        """Test 17 significant digits."""
        result = runner.invoke(
            app, ["-q", "--full-precision", "adjust-alpha", "--m", "2", "--c", "1", "--d", "10"]
        )
        default = stdout_json(invoke("adjust-alpha", "--m", "2", "--c", "1", "--d", "10"))
        assert len(repr(stdout_json(result)["alpha_prime"])) > len(repr(default["alpha_prime"]))

    def test_matrix_file(self, matrix_csv):
        """Test a general matrix with a header row."""
        data = stdout_json(
            invoke("adjust-alpha", "--m", "4", "--matrix", str(matrix_csv), "--c", "0.83",
                   "--d", "67", "--alpha", "0.025")
        )
        assert 0.025 / 4 <= data["alpha_prime"] <= 0.025

    def test_rho_and_matrix(self, matrix_csv):
        """Test conflicting correlation options."""
        result = invoke(
            "adjust-alpha", "--m", "4", "--rho", "0.3", "--matrix", str(matrix_csv),
            "--c", "1", "--d", "20",
        )
        assert result.exit_code == 2
        assert "INVALID_PARAMETER" in result.output

    def test_margin_count(self):
        """Test the wrong number of margins."""
        assert invoke("adjust-alpha", "--m", "2", "--c", "1,2,3", "--d", "20").exit_code == 2

    def test_bad_number(self):
        """Test a non-numeric margin."""
        assert invoke("adjust-alpha", "--m", "2", "--c", "x", "--d", "20").exit_code == 2

    def test_non_convergence_exit_code(self):
        """Test exit code 3 for a numerical failure."""
        result = invoke("adjust-alpha", "--m", "2", "--c", "1", "--d", "20", "--max-iters", "1")
        assert result.exit_code == 3
        assert "NON_CONVERGENCE" in result.output


class TestGrids:
    """Test the grid and curve commands."""

    def test_table1_stdout(self):
        """Test a small grid on stdout."""
        result = invoke("table1", "--m", "2", "--rho", "0", "--c", "0,1", "--d", "10")
        assert result.exit_code == 0, result.output
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "m,rho,c,d,alpha,alpha_prime,critical_value"
        assert len(lines) == 3
        assert float(lines[2].split(",")[5]) == pytest.approx(0.0423, abs=1e-3)

    def test_table1_file(self, tmp_path):
        """Test a grid written to a file with its manifest."""
        out = tmp_path / "t1.csv"
        result = invoke("table1", "--m", "2", "--rho", "0", "--c", "0", "--d", "10", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert out.exists()
        manifest = json.loads((tmp_path / "t1.csv.manifest.json").read_text())
        assert manifest["command"] == "table1"

    def test_figure1(self):
        """Test a short critical-value curve."""
        result = invoke("figure1", "--m", "2", "--rho", "0", "--c-max", "1", "--steps", "3")
        assert result.exit_code == 0, result.output
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "m,rho,d,alpha,c,critical_value"
        assert len(lines) == 4


class TestAnalyzeCommands:
    """Test analysis, rho0 and coverage."""

    def test_analyze(self, write_spec, example1_spec_document):
        """Test the two-endpoint analysis document."""
        data = stdout_json(invoke("analyze", "--spec", str(write_spec(example1_spec_document))))
        assert data["overall_success"] is True
        assert [e["decision"] for e in data["endpoints"]] == ["superior", "noninferior_only"]
        assert data["manifest"]["command"] == "analyze"

    def test_analyze_missing_file(self, tmp_path):
        """Test a spec path that does not exist."""
        result = invoke("analyze", "--spec", str(tmp_path / "missing.json"))
        assert result.exit_code == 2

    def test_rho0(self, matrix_csv):
        """Test the common correlation of a matrix file."""
        data = stdout_json(invoke("rho0", str(matrix_csv)))
        assert data["rho0"] == pytest.approx(0.4298, abs=1e-4)
        assert data["m"] == 4

    def test_coverage(self):
        """Test a small coverage run."""
        data = stdout_json(
            invoke("coverage", "--m", "2", "--rho", "0.5", "--c", "1", "--d", "40",
                   "--reps", "2000", "--seed", "3")
        )
        assert data["reps"] == 2000
        assert data["rectangle_coverage"] <= data["claim_coverage"]


class TestValidate:
    """Test spec validation."""

    def test_valid(self, write_spec, example2_spec_document):
        """Test a valid document echoed with defaults."""
        data = stdout_json(invoke("validate", str(write_spec(example2_spec_document))))
        assert data["modes"]["se_mode"] == "pooled"
        assert data["solver"]["max_iters"] == 200

    def test_negative_eta(self, write_spec, example1_spec_document):
        """Test the pointer and message for a negative margin."""
        example1_spec_document["margins"]["eta"] = [1.0, -2.0]
        result = invoke("validate", str(write_spec(example1_spec_document)))
        assert result.exit_code == 2
        assert "/margins/eta" in result.output
        assert "non-inferiority (eta_k) margin at index 1 must satisfy >= 0" in result.output

    def test_invalid_json(self, tmp_path):
        """Test a file that is not JSON."""
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        result = invoke("validate", str(path))
        assert result.exit_code == 2
        assert "invalid JSON" in result.output


class TestDesignCommands:
    """Test power and sample size."""

    def test_power(self, write_spec, design_document):
        """Test analytic power."""
        data = stdout_json(invoke("power", "--spec", str(write_spec(design_document))))
        assert 0.0 < data["power"] < 1.0
        assert data["method"] == "analytic"

    def test_power_monte_carlo(self, write_spec, design_document):
        """Test simulated power."""
        design_document["mc_reps"] = 2000
        data = stdout_json(
            invoke("power", "--spec", str(write_spec(design_document)), "--monte-carlo")
        )
        assert data["method"] == "monte_carlo"
        assert data["reps"] == 2000

    def test_sample_size_needs_target(self, write_spec, design_document):
        """Test a design without target_power."""
        result = invoke("sample-size", "--spec", str(write_spec(design_document)))
        assert result.exit_code == 2
        assert "/target_power" in result.output

    def test_sample_size(self, write_spec, design_document):
        """Test the sample-size search."""
        design_document["target_power"] = 0.8
        data = stdout_json(invoke("sample-size", "--spec", str(write_spec(design_document))))
        assert data["achieved_power"] >= 0.8


class TestSimulate:
    """Test the simulation command."""

    @pytest.fixture
    def scenario_file(self, write_spec):
        return write_spec(
            {"scenario_id": "tiny", "theta": [0.3, 0.3], "margin_c": 0.2, "reps": 20,
             "methods": ["UNIFIED"]},
            name="scenarios.json",
        )

    def test_single_scenario(self, scenario_file):
        """Test a one-scenario file."""
        result = invoke("simulate", "--scenarios", str(scenario_file))
        assert result.exit_code == 0, result.output
        lines = result.stdout.strip().splitlines()
        assert lines[0].startswith("scenario_id,method,rho,c,theta1,theta2")
        assert lines[1].startswith("tiny,UNIFIED")

    def test_method_override(self, scenario_file):
        """Test --methods replacing the scenario methods."""
        result = invoke("simulate", "--scenarios", str(scenario_file), "--methods", "pw,unified")
        assert result.exit_code == 0, result.output
        assert len(result.stdout.strip().splitlines()) == 3

    def test_needs_one_source(self, scenario_file):
        """Test --scenarios and --table together."""
        result = invoke("simulate", "--scenarios", str(scenario_file), "--table", "2")
        assert result.exit_code == 2

    def test_unknown_table(self):
        """Test an unpublished table number."""
        assert invoke("simulate", "--table", "5").exit_code == 2

    def test_partial_report(self, scenario_file, mocker):
        """Test exit code 3 when a scenario aborts."""
        mocker.patch.object(
            UnifiedComparator, "decide", side_effect=DegenerateSampleError("zero variance")
        )
        result = invoke("simulate", "--scenarios", str(scenario_file))
        assert result.exit_code == 3
        assert "PARTIAL_REPORT" in result.output
