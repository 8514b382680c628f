"""Pytest configuration and fixtures."""

import json

import numpy as np
import pytest

from supnoninf.alpha_solver import clear_solver_cache
from supnoninf.analysis import Direction, EndpointSummary, MarginSpec
from supnoninf.mvt import CorrelationMatrix

# Two-endpoint trial with lower-is-better outcomes, unequal arms and
# per-group covariance matrices.
EXAMPLE1_N = (442, 211)
EXAMPLE1_MEAN_TRT = (13.269, 22.796)
EXAMPLE1_MEAN_CTL = (15.322, 23.512)
EXAMPLE1_COV_TRT = [[78.60082, 36.12524], [36.12524, 111.65005]]
EXAMPLE1_COV_CTL = [[100.13374, 53.62950], [53.62950, 130.84153]]
EXAMPLE1_ETA = (1.0, 2.0)

# Four-endpoint trial summarized by pooled SDs and a correlation matrix.
EXAMPLE2_N = (34, 35)
EXAMPLE2_NAMES = ("FEV1", "FVC", "PEFR", "FEF")
EXAMPLE2_MEAN_TRT = (14.0, 0.86, 16.5, 0.49)
EXAMPLE2_MEAN_CTL = (5.7, 0.34, 1.6, 0.15)
EXAMPLE2_SD = (11.5, 0.96, 22.3, 0.66)
EXAMPLE2_PAIRS = (0.31, 0.25, 0.42, 0.24, 0.67, 0.43)


def example2_matrix() -> np.ndarray:
    r12, r13, r14, r23, r24, r34 = EXAMPLE2_PAIRS
    return np.array(
        [
            [1.0, r12, r13, r14],
            [r12, 1.0, r23, r24],
            [r13, r23, 1.0, r34],
            [r14, r24, r34, 1.0],
        ]
    )


@pytest.fixture(autouse=True)
def fresh_solver_cache():
    """Start every test with an empty alpha' cache."""
    clear_solver_cache()
    yield
    clear_solver_cache()


@pytest.fixture
def example1_summaries():
    """Endpoint summaries with group variances (unpooled SE)."""
    n_trt, n_ctl = EXAMPLE1_N
    return [
        EndpointSummary(
            mean_trt=EXAMPLE1_MEAN_TRT[k],
            mean_ctl=EXAMPLE1_MEAN_CTL[k],
            n_trt=n_trt,
            n_ctl=n_ctl,
            var_trt=EXAMPLE1_COV_TRT[k][k],
            var_ctl=EXAMPLE1_COV_CTL[k][k],
            direction=Direction.LOWER_IS_BETTER,
            name=f"endpoint_{k + 1}",
        )
        for k in range(2)
    ]


@pytest.fixture
def example1_margins():
    return MarginSpec((0.0, 0.0), EXAMPLE1_ETA)


@pytest.fixture
def example1_covariances():
    return np.array(EXAMPLE1_COV_TRT), np.array(EXAMPLE1_COV_CTL)


@pytest.fixture
def example2_summaries():
    """Endpoint summaries with pooled SDs only."""
    n_trt, n_ctl = EXAMPLE2_N
    return [
        EndpointSummary(
            mean_trt=EXAMPLE2_MEAN_TRT[k],
            mean_ctl=EXAMPLE2_MEAN_CTL[k],
            n_trt=n_trt,
            n_ctl=n_ctl,
            pooled_sd=EXAMPLE2_SD[k],
            name=EXAMPLE2_NAMES[k],
        )
        for k in range(4)
    ]


@pytest.fixture
def example2_margins():
    """eta_k = 0.2 SD_k, no superiority margin."""
    return MarginSpec((0.0,) * 4, tuple(0.2 * sd for sd in EXAMPLE2_SD))


@pytest.fixture
def example2_correlation():
    return CorrelationMatrix(example2_matrix())


@pytest.fixture
def example1_spec_document():
    """Analysis spec document for the two-endpoint trial."""
    n_trt, n_ctl = EXAMPLE1_N
    return {
        "endpoints": [
            {
                "name": f"endpoint_{k + 1}",
                "mean_trt": EXAMPLE1_MEAN_TRT[k],
                "mean_ctl": EXAMPLE1_MEAN_CTL[k],
                "n_trt": n_trt,
                "n_ctl": n_ctl,
                "var_trt": EXAMPLE1_COV_TRT[k][k],
                "var_ctl": EXAMPLE1_COV_CTL[k][k],
                "direction": "lower_is_better",
            }
            for k in range(2)
        ],
        "margins": {"epsilon": [0.0, 0.0], "eta": list(EXAMPLE1_ETA)},
        "alpha": 0.025,
        "correlation": {
            "source": "pooled_matrix",
            "cov_trt": EXAMPLE1_COV_TRT,
            "cov_ctl": EXAMPLE1_COV_CTL,
        },
    }


@pytest.fixture
def example2_spec_document():
    """Analysis spec document for the four-endpoint trial (common correlation)."""
    n_trt, n_ctl = EXAMPLE2_N
    return {
        "endpoints": [
            {
                "name": EXAMPLE2_NAMES[k],
                "mean_trt": EXAMPLE2_MEAN_TRT[k],
                "mean_ctl": EXAMPLE2_MEAN_CTL[k],
                "n_trt": n_trt,
                "n_ctl": n_ctl,
                "pooled_sd": EXAMPLE2_SD[k],
            }
            for k in range(4)
        ],
        "margins": {"epsilon": [0.0] * 4, "eta": [0.2 * sd for sd in EXAMPLE2_SD]},
        "alpha": 0.025,
        "correlation": {"source": "rho0_exchangeable", "matrix": example2_matrix().tolist()},
    }


@pytest.fixture
def write_spec(tmp_path):
    """Write a JSON document to a temporary file and return its path."""

    def _write(document, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def raw_trial_csv(tmp_path):
    """Per-subject CSV with two endpoints and two groups."""
    rng = np.random.default_rng(7)
    lines = ["subject_id,group,score_a,score_b"]
    for i in range(40):
        group = "treatment" if i < 20 else "control"
        shift = 1.0 if group == "treatment" else 0.0
        a, b = rng.normal(size=2)
        lines.append(f"s{i},{group},{a + shift:.6f},{0.5 * a + b + shift:.6f}")
    path = tmp_path / "raw.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
