"""Raw per-subject data: CSV loading and reduction to endpoint summaries."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from supnoninf.analysis.statistics import Direction, EndpointSummary
from supnoninf.core import InvalidParameterError, get_logger
from supnoninf.utils.io_utils import read_csv_rows

logger = get_logger(__name__)

DEFAULT_TREATMENT_LABEL = "treatment"
DEFAULT_CONTROL_LABEL = "control"


@dataclass
class TwoGroupSample:
    """Treatment and control observations, one row per subject and one column per endpoint."""

    treatment: np.ndarray
    control: np.ndarray
    endpoint_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.treatment = np.atleast_2d(np.asarray(self.treatment, dtype=np.float64))
        self.control = np.atleast_2d(np.asarray(self.control, dtype=np.float64))
        if self.treatment.shape[1] != self.control.shape[1]:
            raise InvalidParameterError(
                "groups must have the same number of endpoints",
                details={"treatment": self.treatment.shape[1], "control": self.control.shape[1]},
            )
        if not (np.all(np.isfinite(self.treatment)) and np.all(np.isfinite(self.control))):
            raise InvalidParameterError("observations must be finite (missing data unsupported)")
        if not self.endpoint_names:
            self.endpoint_names = [f"endpoint_{k + 1}" for k in range(self.m)]

    @property
    def m(self) -> int:
        return int(self.treatment.shape[1])

    @property
    def n_trt(self) -> int:
        return int(self.treatment.shape[0])

    @property
    def n_ctl(self) -> int:
        return int(self.control.shape[0])

    @property
    def df(self) -> int:
        return self.n_trt + self.n_ctl - 2

    def cov_trt(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.treatment, rowvar=False, ddof=1))

    def cov_ctl(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.control, rowvar=False, ddof=1))

    def mean_difference(self) -> np.ndarray:
        return self.treatment.mean(axis=0) - self.control.mean(axis=0)

    def oriented(self, directions: Optional[Sequence[Direction]] = None) -> "TwoGroupSample":
        """Copy with lower-is-better endpoints negated so larger always favours treatment."""
        if directions is None:
            return self
        if len(directions) != self.m:
            raise InvalidParameterError("one direction per endpoint is required")
        sign = np.array(
            [-1.0 if Direction(d) is Direction.LOWER_IS_BETTER else 1.0 for d in directions]
        )
        return TwoGroupSample(self.treatment * sign, self.control * sign, list(self.endpoint_names))

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Sequence],
        m: Optional[int] = None,
        treatment_label: str = DEFAULT_TREATMENT_LABEL,
        control_label: str = DEFAULT_CONTROL_LABEL,
        endpoint_names: Optional[List[str]] = None,
    ) -> "TwoGroupSample":
        """
        Build from (subject_id, group, value_1, ..., value_m) rows.

        Args:
            rows: Data rows without the header
            m: Expected number of endpoints (inferred when None)
            treatment_label: Group label of the treatment arm
            control_label: Group label of the control arm
            endpoint_names: Optional endpoint names

        Returns:
            TwoGroupSample
        """
        treatment: List[List[float]] = []
        control: List[List[float]] = []
        for line, row in enumerate(rows, start=1):
            values = list(row)
            if m is None:
                m = len(values) - 2
            if len(values) != m + 2:
                raise InvalidParameterError(
                    "row has the wrong number of columns",
                    details={"row": line, "expected": m + 2, "found": len(values)},
                )
            group = str(values[1]).strip()
            try:
                numbers = [float(v) for v in values[2:]]
            except ValueError:
                raise InvalidParameterError(
                    "non-numeric endpoint value", details={"row": line}
                ) from None
            if group == treatment_label:
                treatment.append(numbers)
            elif group == control_label:
                control.append(numbers)
            else:
                raise InvalidParameterError(
                    "unknown group label",
                    details={"row": line, "group": group,
                             "expected": [treatment_label, control_label]},
                )
        if not treatment or not control:
            raise InvalidParameterError("both groups need at least one subject")
        return cls(np.array(treatment), np.array(control), endpoint_names or [])


def load_raw_csv(
    path: Union[str, Path],
    treatment_label: str = DEFAULT_TREATMENT_LABEL,
    control_label: str = DEFAULT_CONTROL_LABEL,
) -> TwoGroupSample:
    """Read a CSV with header (subject_id, group, endpoint_1, ..., endpoint_m)."""
    rows = read_csv_rows(path)
    if len(rows) < 2:
        raise InvalidParameterError("raw data file has no data rows", details={"path": str(path)})
    header, data = rows[0], rows[1:]
    if len(header) < 3:
        raise InvalidParameterError(
            "raw data needs subject_id, group and at least one endpoint column"
        )
    sample = TwoGroupSample.from_rows(
        data,
        m=len(header) - 2,
        treatment_label=treatment_label,
        control_label=control_label,
        endpoint_names=[name.strip() for name in header[2:]],
    )
    logger.info("Loaded raw data", path=str(path), n_trt=sample.n_trt, n_ctl=sample.n_ctl)
    return sample


def summaries_from_raw(
    rows: Union[TwoGroupSample, Iterable[Sequence]],
    m: Optional[int] = None,
    treatment_label: str = DEFAULT_TREATMENT_LABEL,
    control_label: str = DEFAULT_CONTROL_LABEL,
    directions: Optional[Sequence[Direction]] = None,
) -> Tuple[List[EndpointSummary], np.ndarray, np.ndarray]:
    """
    Endpoint summaries plus both group covariance matrices.

    Summaries carry group variances and the pooled SD, so either SE mode applies.
    """
    if isinstance(rows, TwoGroupSample):
        sample = rows
    else:
        sample = TwoGroupSample.from_rows(rows, m, treatment_label, control_label)
    if sample.n_trt < 2 or sample.n_ctl < 2:
        raise InvalidParameterError("each group needs at least two subjects")
    directions = list(directions) if directions is not None else [Direction.HIGHER_IS_BETTER] * sample.m
    if len(directions) != sample.m:
        raise InvalidParameterError("one direction per endpoint is required")

    cov_trt, cov_ctl = sample.cov_trt(), sample.cov_ctl()
    mean_trt = sample.treatment.mean(axis=0)
    mean_ctl = sample.control.mean(axis=0)
    df = sample.df
    summaries = []
    for k in range(sample.m):
        pooled_var = ((sample.n_trt - 1) * cov_trt[k, k] + (sample.n_ctl - 1) * cov_ctl[k, k]) / df
        summaries.append(
            EndpointSummary(
                mean_trt=float(mean_trt[k]),
                mean_ctl=float(mean_ctl[k]),
                n_trt=sample.n_trt,
                n_ctl=sample.n_ctl,
                var_trt=float(cov_trt[k, k]),
                var_ctl=float(cov_ctl[k, k]),
                pooled_sd=float(np.sqrt(pooled_var)),
                direction=directions[k],
                name=sample.endpoint_names[k],
            )
        )
    return summaries, cov_trt, cov_ctl
