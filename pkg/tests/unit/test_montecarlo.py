"""Tests for blocked Monte Carlo counting."""

import pytest

from supnoninf.core import InvalidParameterError
from supnoninf.montecarlo import block_rng, count_in_blocks

pytestmark = pytest.mark.unit


def _count_below_half(size, rng):
    return int((rng.random(size) < 0.5).sum())


class TestCountInBlocks:
    """Test block splitting and reproducibility."""

    def test_block_rng_depends_on_seed_and_block(self):
        """Test stream identity."""
        a = block_rng(5, 0).random()
        assert a == block_rng(5, 0).random()
        assert a != block_rng(5, 1).random()
        assert a != block_rng(6, 0).random()

    def test_thread_count_does_not_change_result(self):
        """Test identical results for 1 and 4 workers."""
        single = count_in_blocks(10_000, 42, _count_below_half, block_size=1000, threads=1)
        pooled = count_in_blocks(10_000, 42, _count_below_half, block_size=1000, threads=4)
        assert single == pooled

    def test_partial_last_block(self):
        """Test that the final short block is counted."""
        sizes = []

        def record(size, rng):
            sizes.append(size)
            return size

        estimate = count_in_blocks(2500, 1, record, block_size=1000, threads=1)
        assert sorted(sizes) == [500, 1000, 1000]
        assert estimate.rate == 1.0
        assert estimate.se == 0.0

    def test_standard_error(self):
        """Test the binomial standard error."""
        estimate = count_in_blocks(20_000, 3, _count_below_half, block_size=5000)
        assert estimate.rate == pytest.approx(0.5, abs=0.02)
        assert estimate.se == pytest.approx((0.25 / 20_000) ** 0.5, rel=0.05)
        assert estimate.to_dict()["reps"] == 20_000

    def test_rejects_zero_reps(self):
        """Test reps below one."""
        with pytest.raises(InvalidParameterError):
            count_in_blocks(0, 1, _count_below_half)
