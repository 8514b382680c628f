"""Monte Carlo studies of the unified test against bootstrap and likelihood-ratio comparators."""

from .harness import (
    MethodReport,
    SimReport,
    generate_trial,
    run_scenario,
    run_scenarios,
    solve_scenario_alpha,
    table2_scenarios,
    table3_scenarios,
    write_report_csv,
)
from .sampling import sample_mvn_group

__all__ = [
    "MethodReport",
    "SimReport",
    "generate_trial",
    "run_scenario",
    "run_scenarios",
    "sample_mvn_group",
    "solve_scenario_alpha",
    "table2_scenarios",
    "table3_scenarios",
    "write_report_csv",
]
