"""Blocked Monte Carlo counting, reproducible for any worker count."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from supnoninf.core import InvalidParameterError, get_logger, settings

logger = get_logger(__name__)

BlockFn = Callable[[int, np.random.Generator], int]


@dataclass(frozen=True)
class RateEstimate:
    """Empirical frequency with its binomial standard error."""

    rate: float
    se: float
    reps: int

    def to_dict(self) -> dict:
        return {"rate": self.rate, "se": self.se, "reps": self.reps}


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for one block; the stream depends only on (seed, block)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def count_in_blocks(
    reps: int,
    seed: int,
    count_block: BlockFn,
    block_size: Optional[int] = None,
    threads: Optional[int] = None,
) -> RateEstimate:
    """
    Split ``reps`` draws into fixed-size blocks and sum the per-block hit counts.

    ``count_block(size, rng)`` returns how many of ``size`` draws hit the event.
    Block boundaries and seeds do not depend on ``threads``.
    """
    if reps < 1:
        raise InvalidParameterError("reps must be at least 1", details={"reps": reps})
    size = block_size or settings.mc_block_size
    workers = max(1, threads or settings.threads)
    sizes = [min(size, reps - start) for start in range(0, reps, size)]

    def run(block: int) -> int:
        return int(count_block(sizes[block], block_rng(seed, block)))

    if workers == 1 or len(sizes) == 1:
        hits = sum(run(block) for block in range(len(sizes)))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, range(len(sizes))))

    rate = hits / reps
    logger.debug("Monte Carlo count", reps=reps, blocks=len(sizes), rate=rate)
    return RateEstimate(rate=rate, se=math.sqrt(rate * (1.0 - rate) / reps), reps=reps)
