"""Tests for the simulation harness and outcome sampling."""

import io
import logging
import math

import numpy as np
import pytest

from supnoninf.comparators import Method, UnifiedComparator
from supnoninf.core import DegenerateSampleError, InvalidParameterError
from supnoninf.mvt import CorrelationMatrix
from supnoninf.schemas import DesignMarginScale, SimScenario
from supnoninf.simulation import (
    generate_trial,
    run_scenario,
    sample_mvn_group,
    solve_scenario_alpha,
    table2_scenarios,
    table3_scenarios,
    write_report_csv,
)
from supnoninf.simulation.harness import design_margin

pytestmark = pytest.mark.unit


def _scenario(**kwargs):
    defaults = {
        "scenario_id": "small",
        "theta": [0.3, 0.3],
        "margin_c": 0.2,
        "reps": 60,
        "seed": 11,
        "methods": ["UNIFIED"],
    }
    defaults.update(kwargs)
    return SimScenario(**defaults)


class TestSampleMvnGroup:
    """Test correlated outcome draws."""

    def test_moments(self):
        """Test means, SDs and correlation."""
        rng = np.random.default_rng(0)
        data = sample_mvn_group(
            40_000, [1.0, -2.0], [2.0, 0.5], CorrelationMatrix.exchangeable(2, 0.5), rng
        )
        assert data.mean(axis=0) == pytest.approx([1.0, -2.0], abs=0.03)
        assert data.std(axis=0) == pytest.approx([2.0, 0.5], rel=0.02)
        assert np.corrcoef(data.T)[0, 1] == pytest.approx(0.5, abs=0.02)

    def test_zero_sd(self):
        """Test a constant column."""
        rng = np.random.default_rng(0)
        data = sample_mvn_group(10, [3.0], [0.0], [[1.0]], rng)
        assert np.all(data == 3.0)

    def test_shape_mismatch(self):
        """Test means of the wrong length."""
        with pytest.raises(InvalidParameterError):
            sample_mvn_group(5, [0.0], [1.0, 1.0], np.eye(2), np.random.default_rng(0))

    def test_negative_sd(self):
        """Test a negative SD."""
        with pytest.raises(InvalidParameterError):
            sample_mvn_group(5, [0.0], [-1.0], np.eye(1), np.random.default_rng(0))

    def test_empty_group(self):
        """Test n below one."""
        with pytest.raises(InvalidParameterError):
            sample_mvn_group(0, [0.0], [1.0], np.eye(1), np.random.default_rng(0))


class TestScenarioSetup:
    """Test scenario helpers."""

    def test_design_margin_scales(self):
        """Test the effect and nominal readings of margin_c."""
        effect = _scenario(design_margin_scale=DesignMarginScale.EFFECT)
        nominal = _scenario(design_margin_scale=DesignMarginScale.NOMINAL)
        assert design_margin(effect) == pytest.approx(0.2 / math.sqrt(0.02))
        assert design_margin(nominal) == 0.2

    def test_alpha_solved_once(self):
        """Test the solve used by the unified test."""
        solution = solve_scenario_alpha(_scenario(margin_c=0.0))
        assert solution.alpha_prime == pytest.approx(0.025)

    def test_trial_reproducible(self):
        """Test that a replicate depends only on (seed, replicate)."""
        scenario = _scenario()
        a = generate_trial(scenario, 7)
        b = generate_trial(scenario, 7)
        c = generate_trial(scenario, 8)
        assert np.array_equal(a.treatment, b.treatment)
        assert not np.array_equal(a.treatment, c.treatment)
        assert (a.n_trt, a.n_ctl, a.m) == (100, 100, 2)

    def test_published_grids(self):
        """Test scenario counts and ids of the published grids."""
        type1 = table2_scenarios(reps=10)
        power = table3_scenarios(reps=10)
        assert len(type1) == 6
        assert len(power) == 24
        assert type1[0].scenario_id == "type1-rho0-c0.2-theta0_0"
        assert type1[0].design_margin_scale is DesignMarginScale.EFFECT
        assert power[0].design_margin_scale is DesignMarginScale.EFFECT
        assert {tuple(s.theta) for s in power} == {(0.4, 0.0), (0.66, 0.0), (0.4, 0.2), (0.33, 0.33)}


class TestRunScenario:
    """Test scenario execution."""

    def test_report(self):
        """Test the report of a complete run."""
        report = run_scenario(_scenario(), threads=1)
        unified = report.method(Method.UNIFIED)
        assert report.status == "complete"
        assert report.reps_used == 60
        assert 0.0 <= unified.rate <= 1.0
        assert report.to_dict()["methods"][0]["method"] == "UNIFIED"

    def test_threads_do_not_change_counts(self):
        """Test identical tallies for one and several workers."""
        scenario = _scenario(methods=["UNIFIED", "PW"])
        serial = run_scenario(scenario, threads=1)
        parallel = run_scenario(scenario, threads=3)
        for method in (Method.UNIFIED, Method.PW):
            assert serial.method(method).rejections == parallel.method(method).rejections

    def test_abort_returns_partial_report(self, mocker):
        """Test that a method error stops the scenario with partial tallies."""
        mocker.patch.object(
            UnifiedComparator, "decide", side_effect=DegenerateSampleError("zero variance")
        )
        report = run_scenario(_scenario(), threads=1)
        assert report.status == "partial"
        assert report.reps_used == 0
        assert report.error["error"] == "DEGENERATE_SAMPLE"

    def test_nominal_scale_warns(self, caplog):
        """Test that the nominal margin reading is flagged as a diagnostic run."""
        scenario = _scenario(design_margin_scale=DesignMarginScale.NOMINAL, reps=5)
        with caplog.at_level(logging.WARNING, logger="supnoninf.simulation.harness"):
            run_scenario(scenario, threads=1)
        assert "Nominal design margin does not hold the level" in caplog.text

    def test_effect_scale_is_quiet(self, caplog):
        """Test that the default reading logs no warning."""
        with caplog.at_level(logging.WARNING, logger="supnoninf.simulation.harness"):
            run_scenario(_scenario(reps=5), threads=1)
        assert "Nominal design margin" not in caplog.text
        assert report.error["replicate"] == 0

    def test_missing_method(self):
        """Test looking up a method that did not run."""
        report = run_scenario(_scenario(reps=5), threads=1)
        with pytest.raises(KeyError):
            report.method(Method.TL)

    def test_report_csv(self):
        """Test the CSV layout."""
        report = run_scenario(_scenario(reps=5), threads=1)
        stream = io.StringIO()
        write_report_csv([report], stream=stream)
        header, row = stream.getvalue().splitlines()
        assert header == "scenario_id,method,rho,c,theta1,theta2,rate,se,reps,seed"
        assert row.startswith("small,UNIFIED,0.0,0.2,0.3,0.3,")
