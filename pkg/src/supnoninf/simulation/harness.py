"""Seeded simulation of two-arm multi-endpoint trials for the unified test and its comparators."""

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Union

import numpy as np

from supnoninf.alpha_solver import AdjustedAlpha, SolverConfig, solve_adjusted_alpha
from supnoninf.analysis.ingestion import TwoGroupSample
from supnoninf.analysis.statistics import MarginSpec
from supnoninf.comparators import (
    BaseComparator,
    BLTComparator,
    Method,
    PWComparator,
    TLComparator,
    UnifiedComparator,
)
from supnoninf.core import SupNonInfException, get_logger, settings
from supnoninf.error_rates import MarginVector
from supnoninf.mvt import CorrelationMatrix
from supnoninf.schemas.simulation import DesignMarginScale, SimScenario
from supnoninf.simulation.sampling import sample_mvn_group
from supnoninf.utils.io_utils import write_csv

logger = get_logger(__name__)

TABLE2_RHOS = (0.0, 0.5)
TABLE2_MARGINS = (0.2, 0.33, 0.5)
TABLE3_MARGINS = (0.2, 0.3, 0.5)
TABLE3_THETAS = ((0.4, 0.0), (0.66, 0.0), (0.4, 0.2), (0.33, 0.33))

REPORT_PREFIX = ("scenario_id", "method", "rho", "c")
REPORT_SUFFIX = ("rate", "se", "reps", "seed")


@dataclass
class MethodReport:
    """Rejection tally of one method over the completed replicates."""

    method: Method
    rejections: int
    reps: int
    wall_time: float
    diagnostics: Dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.rejections / self.reps if self.reps else math.nan

    @property
    def se(self) -> float:
        if not self.reps:
            return math.nan
        return math.sqrt(self.rate * (1.0 - self.rate) / self.reps)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "rate": self.rate,
            "se": self.se,
            "reps": self.reps,
            "rejections": self.rejections,
            "wall_time": self.wall_time,
            "diagnostics": self.diagnostics,
        }


@dataclass
class SimReport:
    """Per-method results of one scenario; ``status`` is "partial" after an abort."""

    scenario: SimScenario
    methods: List[MethodReport]
    alpha_prime: float
    critical_value: float
    design_c: float
    reps_used: int
    wall_time: float
    status: str = "complete"
    error: Optional[dict] = None

    def method(self, method: Union[Method, str]) -> MethodReport:
        method = Method(method)
        for report in self.methods:
            if report.method is method:
                return report
        raise KeyError(method.value)

    def rows(self, width: Optional[int] = None) -> List[list]:
        theta = list(self.scenario.theta)
        theta += [None] * ((width or len(theta)) - len(theta))
        return [
            [
                self.scenario.scenario_id,
                report.method.value,
                self.scenario.rho,
                self.scenario.margin_c,
                *theta,
                report.rate,
                report.se,
                report.reps,
                self.scenario.seed,
            ]
            for report in self.methods
        ]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.model_dump(mode="json"),
            "status": self.status,
            "error": self.error,
            "alpha_prime": self.alpha_prime,
            "critical_value": self.critical_value,
            "design_c": self.design_c,
            "reps_used": self.reps_used,
            "wall_time": self.wall_time,
            "methods": [report.to_dict() for report in self.methods],
        }


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Counter-based stream for one replicate; depends only on (seed, replicate)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replicate])))


def bootstrap_seed(seed: int, replicate: int) -> int:
    return int(np.random.SeedSequence([seed, replicate, 1]).generate_state(1)[0])


def design_margin(scenario: SimScenario) -> float:
    """Standardized common margin c used for the alpha' solve (sigma = 1)."""
    if scenario.design_margin_scale is DesignMarginScale.NOMINAL:
        return scenario.margin_c
    return scenario.margin_c / math.sqrt(1.0 / scenario.n_trt + 1.0 / scenario.n_ctl)


def solve_scenario_alpha(scenario: SimScenario) -> AdjustedAlpha:
    m = scenario.m
    return solve_adjusted_alpha(
        m,
        MarginVector.common(design_margin(scenario), m),
        CorrelationMatrix.exchangeable(m, scenario.rho),
        scenario.n_trt + scenario.n_ctl - 2,
        SolverConfig(alpha=scenario.alpha),
    )


def build_comparators(scenario: SimScenario, alpha_prime: float) -> Dict[Method, BaseComparator]:
    margins = MarginSpec((scenario.epsilon,) * scenario.m, (scenario.eta,) * scenario.m)
    factories = {
        Method.UNIFIED: lambda: UnifiedComparator(
            margins,
            scenario.alpha,
            alpha_prime=None if scenario.plug_in_alpha else alpha_prime,
            plug_in=scenario.plug_in_alpha,
        ),
        # replicates are already spread over the harness threads
        Method.TL: lambda: TLComparator(
            margins, scenario.alpha, boot_reps=scenario.boot_reps, threads=1
        ),
        Method.BLT: lambda: BLTComparator(
            margins, scenario.alpha, boot_reps=scenario.boot_reps, threads=1
        ),
        Method.PW: lambda: PWComparator(margins, scenario.alpha),
    }
    return {method: factories[method]() for method in dict.fromkeys(scenario.methods)}


def generate_trial(scenario: SimScenario, replicate: int) -> TwoGroupSample:
    """Data of replicate ``replicate``: treatment mean theta, control mean 0, unit SDs."""
    rng = replicate_rng(scenario.seed, replicate)
    R = CorrelationMatrix.exchangeable(scenario.m, scenario.rho)
    sd = np.ones(scenario.m)
    treatment = sample_mvn_group(scenario.n_trt, scenario.theta, sd, R, rng)
    control = sample_mvn_group(scenario.n_ctl, np.zeros(scenario.m), sd, R, rng)
    return TwoGroupSample(treatment, control)


@dataclass
class _ChunkResult:
    rejections: Dict[Method, int]
    seconds: Dict[Method, float]
    done: int
    error: Optional[dict] = None


def _run_chunk(
    scenario: SimScenario,
    comparators: Dict[Method, BaseComparator],
    replicates: range,
    abort: threading.Event,
) -> _ChunkResult:
    rejections = {method: 0 for method in comparators}
    seconds = {method: 0.0 for method in comparators}
    done = 0
    for r in replicates:
        if abort.is_set():
            break
        data = generate_trial(scenario, r)
        boot_seed = bootstrap_seed(scenario.seed, r)
        try:
            decisions = {}
            for method, comparator in comparators.items():
                start = time.perf_counter()
                decisions[method] = comparator.decide(data, seed=boot_seed).reject_h0
                seconds[method] += time.perf_counter() - start
        except SupNonInfException as exc:
            abort.set()
            logger.error(
                "Method failed, aborting scenario",
                scenario=scenario.scenario_id,
                replicate=r,
                error=exc.code,
            )
            return _ChunkResult(rejections, seconds, done, {"replicate": r, **exc.to_dict()})
        for method, reject in decisions.items():
            rejections[method] += int(reject)
        done += 1
    return _ChunkResult(rejections, seconds, done)


def run_scenario(scenario: SimScenario, threads: Optional[int] = None) -> SimReport:
    """
    Simulate ``scenario.reps`` trials and tally how often each method rejects H0.

    alpha' for the unified test is solved once from the design constants and
    reused across replicates unless ``plug_in_alpha`` is set. A method error
    stops the scenario and returns the tallies of the finished replicates.
    """
    started = time.perf_counter()
    if scenario.design_margin_scale is DesignMarginScale.NOMINAL:
        logger.warning(
            "Nominal design margin does not hold the level; use it only as a diagnostic",
            scenario=scenario.scenario_id,
            margin_c=scenario.margin_c,
        )
    solution = solve_scenario_alpha(scenario)
    comparators = build_comparators(scenario, solution.alpha_prime)
    workers = max(1, threads or scenario.threads or settings.threads)
    chunk = max(1, math.ceil(scenario.reps / workers))
    chunks = [range(s, min(s + chunk, scenario.reps)) for s in range(0, scenario.reps, chunk)]
    abort = threading.Event()

    logger.info(
        "Running scenario",
        scenario=scenario.scenario_id,
        reps=scenario.reps,
        methods=",".join(m.value for m in comparators),
        alpha_prime=solution.alpha_prime,
        threads=workers,
    )
    if workers == 1 or len(chunks) == 1:
        results = [_run_chunk(scenario, comparators, part, abort) for part in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda part: _run_chunk(scenario, comparators, part, abort), chunks)
            )

    done = sum(result.done for result in results)
    errors = [result.error for result in results if result.error is not None]
    reports = [
        MethodReport(
            method=method,
            rejections=sum(result.rejections[method] for result in results),
            reps=done,
            wall_time=sum(result.seconds[method] for result in results),
        )
        for method in comparators
    ]
    report = SimReport(
        scenario=scenario,
        methods=reports,
        alpha_prime=solution.alpha_prime,
        critical_value=solution.critical_value,
        design_c=design_margin(scenario),
        reps_used=done,
        wall_time=time.perf_counter() - started,
        status="partial" if errors else "complete",
        error=errors[0] if errors else None,
    )
    logger.info(
        "Scenario finished",
        scenario=scenario.scenario_id,
        status=report.status,
        reps_used=done,
        **{m.value: r.rate for m, r in zip(comparators, reports)},
    )
    return report


def run_scenarios(
    scenarios: Sequence[SimScenario], threads: Optional[int] = None
) -> List[SimReport]:
    return [run_scenario(scenario, threads=threads) for scenario in scenarios]


def _scenario_id(prefix: str, rho: float, c: float, theta: Sequence[float]) -> str:
    return f"{prefix}-rho{rho:g}-c{c:g}-theta" + "_".join(f"{v:g}" for v in theta)


def table2_scenarios(
    reps: int = 10_000,
    seed: int = 20100908,
    scale: DesignMarginScale = DesignMarginScale.EFFECT,
    boot_reps: Optional[int] = None,
    methods: Optional[Sequence[Method]] = None,
) -> List[SimScenario]:
    """Type I error scenarios: theta = (0, 0), n = 100 per arm."""
    return [
        SimScenario(
            scenario_id=_scenario_id("type1", rho, c, (0.0, 0.0)),
            rho=rho,
            theta=[0.0, 0.0],
            margin_c=c,
            reps=reps,
            seed=seed,
            design_margin_scale=scale,
            boot_reps=boot_reps,
            methods=list(methods or Method),
        )
        for rho in TABLE2_RHOS
        for c in TABLE2_MARGINS
    ]


def table3_scenarios(
    reps: int = 10_000,
    seed: int = 20100908,
    scale: DesignMarginScale = DesignMarginScale.EFFECT,
    boot_reps: Optional[int] = None,
    methods: Optional[Sequence[Method]] = None,
) -> List[SimScenario]:
    """Power scenarios over rho, the non-inferiority margin and four effect pairs."""
    return [
        SimScenario(
            scenario_id=_scenario_id("power", rho, eta, theta),
            rho=rho,
            theta=list(theta),
            margin_c=eta,
            reps=reps,
            seed=seed,
            design_margin_scale=scale,
            boot_reps=boot_reps,
            methods=list(methods or Method),
        )
        for rho in TABLE2_RHOS
        for eta in TABLE3_MARGINS
        for theta in TABLE3_THETAS
    ]


def write_report_csv(
    reports: Sequence[SimReport],
    path: Optional[Union[str, Path]] = None,
    digits: Optional[int] = None,
    manifest: Optional[dict] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """One row per (scenario, method) with columns theta1..thetaM for the widest scenario."""
    width = max((len(report.scenario.theta) for report in reports), default=0)
    header = [*REPORT_PREFIX, *(f"theta{k + 1}" for k in range(width)), *REPORT_SUFFIX]
    rows = [row for report in reports for row in report.rows(width)]
    write_csv(header, rows, path=path, digits=digits, manifest=manifest, stream=stream)
