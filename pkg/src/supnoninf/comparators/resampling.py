"""Vectorized two-group moments and null-centred within-group bootstrap."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.core import DegenerateSampleError, get_logger, settings
from supnoninf.montecarlo import block_rng

logger = get_logger(__name__)

BOOT_BLOCK_SIZE = 250
_ZERO_VARIANCE = 1e-300


@dataclass
class GroupMoments:
    """
    Means and covariances of one or many two-group samples.

    Arrays carry a leading replicate axis of length B (B = 1 for observed data).
    """

    diff: np.ndarray  # (B, m)
    cov_trt: np.ndarray  # (B, m, m)
    cov_ctl: np.ndarray  # (B, m, m)
    n_trt: int
    n_ctl: int

    @property
    def df(self) -> int:
        return self.n_trt + self.n_ctl - 2

    @property
    def m(self) -> int:
        return int(self.diff.shape[1])

    def pooled_cov(self) -> np.ndarray:
        return ((self.n_trt - 1) * self.cov_trt + (self.n_ctl - 1) * self.cov_ctl) / self.df

    def pooled_se(self) -> np.ndarray:
        var = np.diagonal(self.pooled_cov(), axis1=1, axis2=2)
        return np.sqrt(var * (1.0 / self.n_trt + 1.0 / self.n_ctl))

    def t_stats(self, epsilon: Sequence[float], eta: Sequence[float]) -> tuple:
        """(t_sup, t_ni) with pooled standard errors, each (B, m)."""
        se = self.pooled_se()
        t_sup = (self.diff - np.asarray(epsilon)) / se
        t_ni = (self.diff + np.asarray(eta)) / se
        return t_sup, t_ni


def _batched_cov(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=1, keepdims=True)
    return np.einsum("bni,bnj->bij", centered, centered) / (x.shape[1] - 1)


def moments(treatment: np.ndarray, control: np.ndarray) -> GroupMoments:
    """Moments of (n, m) arrays or of (B, n, m) stacks."""
    trt = treatment if treatment.ndim == 3 else treatment[np.newaxis]
    ctl = control if control.ndim == 3 else control[np.newaxis]
    return GroupMoments(
        diff=trt.mean(axis=1) - ctl.mean(axis=1),
        cov_trt=_batched_cov(trt),
        cov_ctl=_batched_cov(ctl),
        n_trt=int(trt.shape[1]),
        n_ctl=int(ctl.shape[1]),
    )


def sample_moments(sample: TwoGroupSample) -> GroupMoments:
    return moments(sample.treatment, sample.control)


def _degenerate(x: np.ndarray) -> np.ndarray:
    spread = x.max(axis=1) - x.min(axis=1)
    return np.any(spread <= _ZERO_VARIANCE, axis=1)


def _resample(
    data: np.ndarray, size: int, rng: np.random.Generator, max_retries: int
) -> np.ndarray:
    n = data.shape[0]
    draws = data[rng.integers(0, n, size=(size, n))]
    for _ in range(max_retries):
        bad = np.flatnonzero(_degenerate(draws))
        if bad.size == 0:
            return draws
        draws[bad] = data[rng.integers(0, n, size=(bad.size, n))]
    if np.any(_degenerate(draws)):
        raise DegenerateSampleError(
            "bootstrap resample kept a zero-variance endpoint",
            details={"retries": max_retries},
        )
    return draws


def null_bootstrap(
    sample: TwoGroupSample,
    shift: Sequence[float],
    reps: Optional[int] = None,
    seed: int = 0,
    max_retries: Optional[int] = None,
    threads: Optional[int] = None,
) -> GroupMoments:
    """
    Within-group bootstrap with the treatment arm recentred so that the
    population mean difference equals ``shift``.

    Replicates come in fixed blocks seeded by (seed, block); the result does
    not depend on ``threads``.
    """
    reps = reps or settings.boot_reps
    retries = settings.boot_max_retries if max_retries is None else max_retries
    trt = sample.treatment - sample.treatment.mean(axis=0) + sample.control.mean(axis=0)
    trt = trt + np.asarray(shift, dtype=np.float64)
    ctl = sample.control
    sizes = [min(BOOT_BLOCK_SIZE, reps - start) for start in range(0, reps, BOOT_BLOCK_SIZE)]

    def run(block: int) -> GroupMoments:
        rng = block_rng(seed, block)
        return moments(
            _resample(trt, sizes[block], rng, retries),
            _resample(ctl, sizes[block], rng, retries),
        )

    workers = max(1, threads or settings.threads)
    if workers == 1 or len(sizes) == 1:
        parts = [run(block) for block in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))

    return GroupMoments(
        diff=np.concatenate([p.diff for p in parts]),
        cov_trt=np.concatenate([p.cov_trt for p in parts]),
        cov_ctl=np.concatenate([p.cov_ctl for p in parts]),
        n_trt=sample.n_trt,
        n_ctl=sample.n_ctl,
    )


def upper_critical_value(values: np.ndarray, alpha: float, total: Optional[int] = None) -> float:
    """
    Smallest cut-off d with #(values > d) <= floor(alpha * total).

    ``total`` counts replicates outside ``values`` too (gated-out replicates);
    with too few values every cut-off qualifies and -inf is returned.
    """
    total = values.size if total is None else total
    allowed = int(math.floor(alpha * total + 1e-9))
    if values.size <= allowed:
        return -math.inf
    ordered = np.sort(values)[::-1]
    return float(ordered[allowed])
