"""Tests for two-group moments and the null-centred bootstrap."""

import math

import numpy as np
import pytest

from supnoninf.analysis import TwoGroupSample
from supnoninf.comparators import resampling
from supnoninf.comparators.resampling import (
    moments,
    null_bootstrap,
    sample_moments,
    upper_critical_value,
)
from supnoninf.core import DegenerateSampleError

pytestmark = pytest.mark.unit


@pytest.fixture
def sample():
    rng = np.random.default_rng(21)
    return TwoGroupSample(rng.normal(0.5, 1.0, (30, 2)), rng.normal(0.0, 1.0, (25, 2)))


class TestMoments:
    """Test moment computation."""

    def test_matches_numpy(self, sample):
        """Test against numpy means and covariances."""
        mom = sample_moments(sample)
        assert mom.diff[0] == pytest.approx(sample.mean_difference())
        assert mom.cov_trt[0] == pytest.approx(sample.cov_trt())
        assert mom.df == 53
        assert mom.m == 2

    def test_pooled_se(self, sample):
        """Test pooled standard errors."""
        mom = sample_moments(sample)
        pooled = (29 * np.diag(sample.cov_trt()) + 24 * np.diag(sample.cov_ctl())) / 53
        assert mom.pooled_se()[0] == pytest.approx(np.sqrt(pooled * (1 / 30 + 1 / 25)))

    def test_batched(self, sample):
        """Test a stack of replicates."""
        stack_t = np.stack([sample.treatment, sample.treatment[::-1]])
        stack_c = np.stack([sample.control, sample.control])
        mom = moments(stack_t, stack_c)
        assert mom.diff.shape == (2, 2)
        assert mom.diff[0] == pytest.approx(mom.diff[1])


class TestNullBootstrap:
    """Test the recentred bootstrap."""

    def test_centred_at_shift(self, sample):
        """Test that replicate differences centre on the requested shift."""
        boot = null_bootstrap(sample, [0.1, -0.2], reps=2000, seed=3)
        assert boot.diff.shape == (2000, 2)
        assert boot.diff.mean(axis=0) == pytest.approx([0.1, -0.2], abs=0.03)

    def test_threads_do_not_change_replicates(self, sample):
        """Test reproducibility across worker counts."""
        a = null_bootstrap(sample, [0.0, 0.0], reps=600, seed=5, threads=1)
        b = null_bootstrap(sample, [0.0, 0.0], reps=600, seed=5, threads=3)
        assert np.array_equal(a.diff, b.diff)

    def test_threads_default_to_settings(self, sample, mocker):
        """Test that the worker count falls back to the configured threads."""
        mocker.patch.object(resampling.settings, "threads", 3)
        pool = mocker.patch.object(
            resampling, "ThreadPoolExecutor", wraps=resampling.ThreadPoolExecutor
        )
        boot = null_bootstrap(sample, [0.0, 0.0], reps=600, seed=5)
        pool.assert_called_once_with(max_workers=3)
        assert boot.diff.shape == (600, 2)

    def test_degenerate(self):
        """Test a constant endpoint."""
        data = TwoGroupSample(np.ones((5, 1)), np.ones((5, 1)))
        with pytest.raises(DegenerateSampleError):
            null_bootstrap(data, [0.0], reps=10, seed=1, max_retries=2)


class TestUpperCriticalValue:
    """Test the bootstrap cut-off."""

    def test_cutoff(self):
        """Test the allowed number of exceedances."""
        values = np.arange(1.0, 11.0)
        cut = upper_critical_value(values, 0.2)
        assert cut == 8.0
        assert np.count_nonzero(values > cut) == 2

    def test_gated_total(self):
        """Test too few gated values."""
        assert upper_critical_value(np.array([3.0]), 0.05, total=100) == -math.inf
