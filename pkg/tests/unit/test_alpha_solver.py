"""Tests for the adjusted alpha solver and grids."""

import math

import pytest

from supnoninf.alpha_solver import (
    GRID_COLUMNS,
    GridRow,
    SolverConfig,
    critical_value,
    figure1_curve,
    solve_adjusted_alpha,
    table1_grid,
    write_grid_csv,
)
from supnoninf.core import ConvergenceError, InvalidParameterError, settings
from supnoninf.error_rates import MarginVector, bound_at_alpha
from supnoninf.mvt import CorrelationMatrix, t_quantile
from supnoninf.utils.io_utils import read_csv_rows

pytestmark = pytest.mark.unit


def _solve(m, rho, c, d, **cfg):
    return solve_adjusted_alpha(
        m,
        MarginVector.common(c, m),
        CorrelationMatrix.exchangeable(m, rho),
        d,
        SolverConfig(**cfg),
    )


class TestSolverConfig:
    """Test solver settings."""

    def test_defaults_from_settings(self):
        """Test that unset fields come from settings."""
        cfg = SolverConfig()
        assert cfg.zeta == settings.zeta
        assert cfg.max_iters == settings.max_iters

    @pytest.mark.parametrize(
        "kwargs", [{"alpha": 0.0}, {"alpha": 1.0}, {"zeta": 0.0}, {"max_iters": 0}, {"p": 0}]
    )
    def test_rejects_bad_values(self, kwargs):
        """Test invalid solver settings."""
        with pytest.raises(InvalidParameterError):
            SolverConfig(**kwargs)


class TestSolveAdjustedAlpha:
    """Test bisection for alpha'."""

    def test_zero_margin_gives_bonferroni(self):
        """Test c = 0: alpha' = alpha / m."""
        result = _solve(3, 0.0, 0.0, 20, alpha=0.05)
        assert result.alpha_prime == pytest.approx(0.05 / 3)
        assert result.boundary == "alpha_over_m"

    def test_single_endpoint_keeps_alpha(self):
        """Test m = 1: no adjustment is needed."""
        result = _solve(1, 0.0, 1.0, 30, alpha=0.05)
        assert result.alpha_prime == pytest.approx(0.05)
        assert result.boundary == "alpha"
        assert result.critical_value == pytest.approx(t_quantile(0.05, 30))

    @pytest.mark.parametrize(
        "m,rho,c,d,expected",
        [
            (2, 0.0, 1.0, 10, 0.0423),
            (2, 0.0, 1.0, 200, 0.0461),
            (2, 0.5, 2.0, 10, 0.0293),
            (2, 0.5, 2.0, 200, 0.0273),
            (3, 0.0, 3.0, 10, 0.0249),
            (3, 0.0, 3.0, 200, 0.0237),
        ],
    )
    def test_published_cells(self, m, rho, c, d, expected):
        """Test selected cells of the alpha' table."""
        assert _solve(m, rho, c, d).alpha_prime == pytest.approx(expected, abs=1e-3)

    def test_solution_controls_bound(self):
        """Test that the bound at the solution stays at or below alpha."""
        result = _solve(2, 0.5, 1.0, 40, alpha=0.05)
        assert result.achieved_bound <= 0.05 + settings.zeta
        assert 0.025 <= result.alpha_prime <= 0.05

    def test_solution_is_near_largest(self):
        """Test that a slightly larger alpha' exceeds alpha."""
        c = MarginVector.common(1.0, 2)
        R = CorrelationMatrix.exchangeable(2, 0.0)
        result = solve_adjusted_alpha(2, c, R, 30, SolverConfig(alpha=0.05))
        above = bound_at_alpha(result.alpha_prime * 1.01, c, R, 30)
        assert above.value > 0.05 - settings.zeta

    def test_history_recorded(self):
        """Test the bisection trace."""
        result = _solve(2, 0.0, 1.0, 20)
        data = result.to_dict(with_history=True)
        assert len(data["history"]) >= result.iterations
        assert "history" not in result.to_dict()

    def test_cache_does_not_change_result(self, monkeypatch):
        """Test identical answers with the cache on and off."""
        cached = _solve(2, 0.5, 1.0, 50)
        monkeypatch.setattr(settings, "solver_cache_enabled", False)
        uncached = _solve(2, 0.5, 1.0, 50)
        assert cached.alpha_prime == uncached.alpha_prime

    def test_non_convergence(self):
        """Test that the iteration cap raises with the final bracket."""
        with pytest.raises(ConvergenceError) as exc_info:
            _solve(2, 0.0, 1.0, 20, max_iters=1)
        lo, hi = exc_info.value.bracket
        assert lo < hi

    def test_dimension_mismatch(self):
        """Test inconsistent m."""
        with pytest.raises(InvalidParameterError):
            solve_adjusted_alpha(3, MarginVector.common(1.0, 2), CorrelationMatrix.identity(2), 10)

    def test_p_above_m(self):
        """Test p > m."""
        with pytest.raises(InvalidParameterError):
            _solve(2, 0.0, 1.0, 10, p=3)

    def test_p_of_m_is_more_permissive(self):
        """Test that requiring two superior endpoints allows a larger alpha'."""
        one = _solve(2, 0.0, 1.0, 40).alpha_prime
        both = _solve(2, 0.0, 1.0, 40, p=2).alpha_prime
        assert both >= one

    def test_critical_value(self):
        """Test the percentage point helper."""
        assert critical_value(0.025, math.inf) == pytest.approx(1.959964, abs=1e-6)


class TestGrids:
    """Test the alpha' grid and critical-value curve."""

    def test_grid_order_independent_of_threads(self):
        """Test row order for one and several workers."""
        kwargs = {"m_list": (2,), "rho_list": (0.0, 0.5), "c_list": (0.0, 1.0), "d_list": (10, 20)}
        serial = table1_grid(threads=1, **kwargs)
        parallel = table1_grid(threads=3, **kwargs)
        assert serial == parallel
        assert [(r.rho, r.c, r.d) for r in serial][:2] == [(0.0, 0.0, 10), (0.0, 0.0, 20)]

    def test_curve_shape(self):
        """Test the critical-value curve endpoints."""
        curve = figure1_curve(2, 0.0, 100, c_range=(0.0, 1.0), steps=3)
        assert [point.c for point in curve] == [0.0, 0.5, 1.0]
        assert curve[0].critical_value == pytest.approx(t_quantile(0.025, 100), abs=1e-6)
        assert curve[2].critical_value < curve[0].critical_value

    @pytest.mark.parametrize("c_range,steps", [((0.0, 6.0), 5), ((2.0, 1.0), 5), ((0.0, 1.0), 1)])
    def test_curve_rejects_bad_range(self, c_range, steps):
        """Test invalid ranges and step counts."""
        with pytest.raises(InvalidParameterError):
            figure1_curve(2, 0.0, 100, c_range=c_range, steps=steps)

    def test_write_grid_csv(self, tmp_path):
        """Test CSV layout and manifest sidecar."""
        path = tmp_path / "grid.csv"
        row = GridRow(2, 0.0, 1.0, 10, 0.05, 0.0423, 2.3)
        write_grid_csv([row], path=path, digits=4, manifest={"command": "table1"})
        rows = read_csv_rows(path)
        assert rows[0] == list(GRID_COLUMNS)
        assert rows[1][5] == "0.0423"
        assert (tmp_path / "grid.csv.manifest.json").exists()
