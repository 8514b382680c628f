"""supnoninf CLI - Batch command-line interface for the unified superiority/non-inferiority test.

Usage:
    supnoninf adjust-alpha --m 2 --rho 0.43 --c 1.24,2.14 --d 651    Solve alpha'
    supnoninf analyze --spec trial.json                               Analyze a trial
    supnoninf power --spec design.json                                Power under an alternative
    supnoninf sample-size --spec design.json                          Minimum group sizes
    supnoninf simulate --table 2                                      Simulation study
    supnoninf table1 --out table1.csv                                 alpha' grid
    supnoninf figure1 --m 2,3 --rho 0,0.5 --d 100                     Critical-value curves
    supnoninf rho0 corr.csv                                           Common correlation
"""

import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

import typer
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from supnoninf.alpha_solver import (
    GRID_COLUMNS,
    PUBLISHED_DFS,
    PUBLISHED_MARGINS,
    PUBLISHED_RHOS,
    SolverConfig,
    figure1_curve,
    solve_adjusted_alpha,
    table1_grid,
    write_grid_csv,
)
from supnoninf.analysis.runner import analyze_spec, load_analysis_spec
from supnoninf.analysis.service import simulate_ci_coverage
from supnoninf.analysis.statistics import armitage_parmar_rho0
from supnoninf.comparators import Method
from supnoninf.core import (
    InvalidParameterError,
    SpecValidationError,
    SupNonInfException,
    get_logger,
    settings,
    setup_logging,
)
from supnoninf.error_rates import MarginVector
from supnoninf.mvt import CorrelationMatrix
from supnoninf.power import analytic_power, mc_power, min_sample_size
from supnoninf.schemas import (
    AnalysisSpec,
    DesignMarginScale,
    PowerDocument,
    ScenarioFile,
    SimScenario,
    analysis_semantic_errors,
    build_manifest,
    power_semantic_errors,
    tool_versions,
    validate_spec,
)
from supnoninf.simulation import run_scenarios, table2_scenarios, table3_scenarios, write_report_csv
from supnoninf.utils.io_utils import read_csv_rows, round_tree, write_json

logger = get_logger(__name__)
console = Console(stderr=True)

app = typer.Typer(
    name="supnoninf",
    help="supnoninf - Unified superiority/non-inferiority tests on correlated endpoints",
    add_completion=False,
)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

OUT_OPTION = typer.Option(None, "--out", "-o", help="Write the artifact to a file")
SPEC_KINDS = {"analysis": AnalysisSpec, "power": PowerDocument, "scenarios": ScenarioFile}


@dataclass
class RunOptions:
    """Global flags shared by every subcommand."""

    threads: Optional[int] = None
    full_precision: bool = False
    diagnostics: bool = False
    quiet: bool = False

    @property
    def digits(self) -> int:
        return settings.full_precision_digits if self.full_precision else settings.output_sig_digits


@app.callback()
def main(
    ctx: typer.Context,
    threads: Optional[int] = typer.Option(None, "--threads", "-j", help="Worker threads", min=1),
    full_precision: bool = typer.Option(
        False, "--full-precision", help="Write 17 significant digits instead of 6"
    ),
    diagnostics: bool = typer.Option(
        False, "--diagnostics", help="Attach solver and integration accuracy reports"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No summary tables on stderr"),
):
    """Unified superiority/non-inferiority testing. Artifacts go to stdout or --out."""
    setup_logging("DEBUG" if verbose else None)
    ctx.obj = RunOptions(threads, full_precision, diagnostics, quiet)


# =============================================================================
# HELPERS
# =============================================================================


@contextmanager
def _exit_codes():
    """Map library failures to exit codes, printing the error document on stderr."""
    try:
        yield
    except (InvalidParameterError, SpecValidationError) as exc:
        typer.echo(json.dumps(exc.to_dict(), default=str), err=True)
        raise typer.Exit(EXIT_VALIDATION)
    except SupNonInfException as exc:
        typer.echo(json.dumps(exc.to_dict(), default=str), err=True)
        raise typer.Exit(EXIT_NUMERICAL)


def _options(ctx: typer.Context) -> RunOptions:
    return ctx.obj if isinstance(ctx.obj, RunOptions) else RunOptions()


def _floats(text: str, name: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}", param_hint=name)


def _ints(text: str, name: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated integers, got {text!r}", param_hint=name)


def _load_document(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SpecValidationError([{"pointer": "", "message": f"file not found: {path}"}])
    except json.JSONDecodeError as exc:
        raise SpecValidationError([{"pointer": "", "message": f"invalid JSON: {exc}"}])


def _read_matrix(path: Path) -> CorrelationMatrix:
    """Square numeric CSV, optionally preceded by a header row."""
    try:
        rows = read_csv_rows(path)
    except FileNotFoundError:
        raise InvalidParameterError("matrix file not found", details={"path": str(path)})
    if rows:
        try:
            [float(cell) for cell in rows[0]]
        except ValueError:
            rows = rows[1:]
    try:
        values = [[float(cell) for cell in row] for row in rows]
    except ValueError:
        raise InvalidParameterError("matrix file must hold numbers", details={"path": str(path)})
    return CorrelationMatrix(values)


def _emit_json(
    data: Dict[str, Any],
    command: str,
    parameters: Dict[str, Any],
    opts: RunOptions,
    out: Optional[Path],
    seed: Optional[int] = None,
) -> None:
    document = round_tree(data, opts.digits)
    document["manifest"] = _manifest(command, parameters, seed)
    write_json(document, out)


def _manifest(command: str, parameters: Dict[str, Any], seed: Optional[int] = None) -> dict:
    manifest = build_manifest(command, parameters, seed).model_dump(mode="json")
    return round_tree(manifest, settings.full_precision_digits)


def _summary(title: str, rows: List[tuple], opts: RunOptions, columns=("Quantity", "Value")):
    if opts.quiet:
        return
    table = Table(title=title)
    table.add_column(columns[0], style="cyan")
    for column in columns[1:]:
        table.add_column(column)
    for row in rows:
        table.add_row(*(str(cell) for cell in row))
    console.print(table)


def _correlation(m: int, rho: Optional[float], matrix: Optional[Path]) -> CorrelationMatrix:
    if matrix is not None:
        if rho is not None:
            raise InvalidParameterError("give --rho or --matrix, not both")
        R = _read_matrix(matrix)
        if R.dim != m:
            raise InvalidParameterError(
                "matrix dimension differs from --m", details={"m": m, "matrix": R.dim}
            )
        return R
    return CorrelationMatrix.exchangeable(m, rho or 0.0)


def _margins(text: str, m: int) -> MarginVector:
    values = _floats(text, "--c")
    if len(values) == 1:
        values = values * m
    if len(values) != m:
        raise InvalidParameterError(
            "--c needs one value or m values", details={"m": m, "given": len(values)}
        )
    return MarginVector(values)


# =============================================================================
# ALPHA' COMMANDS
# =============================================================================


@app.command("adjust-alpha")
def adjust_alpha(
    ctx: typer.Context,
    m: int = typer.Option(..., "--m", help="Number of endpoints", min=1),
    c: str = typer.Option(..., "--c", help="Standardized margins, one value or m values"),
    d: float = typer.Option(..., "--d", help="Degrees of freedom (inf for normal)"),
    rho: Optional[float] = typer.Option(None, "--rho", help="Common correlation"),
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Correlation matrix CSV"),
    alpha: float = typer.Option(0.05, "--alpha", help="Overall one-sided level"),
    p: int = typer.Option(1, "--p", help="Endpoints required to be superior", min=1),
    zeta: Optional[float] = typer.Option(None, "--zeta", help="Bisection precision"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Bisection limit"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Lattice-rule seed"),
    out: Optional[Path] = OUT_OPTION,
):
    """Solve the adjusted level alpha' and its critical value.

    Examples:
        supnoninf adjust-alpha --m 2 --rho 0.4311 --c 1.2380,2.1409 --d 651 --alpha 0.025
        supnoninf adjust-alpha --m 3 --matrix corr.csv --c 1 --d 60
    """
    opts = _options(ctx)
    with _exit_codes():
        margins = _margins(c, m)
        R = _correlation(m, rho, matrix)
        cfg = SolverConfig(alpha=alpha, zeta=zeta, max_iters=max_iters, p=p, seed=seed)
        solution = solve_adjusted_alpha(m, margins, R, d, cfg)
        parameters = {
            "m": m,
            "c": margins.to_list(),
            "d": d,
            "correlation": R.to_list(),
            "alpha": alpha,
            "p": p,
            "zeta": cfg.zeta,
            "max_iters": cfg.max_iters,
        }
        _summary(
            "Adjusted level",
            [
                ("alpha'", f"{solution.alpha_prime:.6g}"),
                ("critical value", f"{solution.critical_value:.6g}"),
                ("max(gamma1, gamma2)", f"{solution.achieved_bound:.6g}"),
                ("boundary", solution.boundary or "-"),
            ],
            opts,
        )
        _emit_json(
            solution.to_dict(with_history=opts.diagnostics),
            "adjust-alpha",
            parameters,
            opts,
            out,
            seed=cfg.seed,
        )


@app.command()
def table1(
    ctx: typer.Context,
    alpha: float = typer.Option(0.05, "--alpha", help="Overall one-sided level"),
    m_list: str = typer.Option("2,3", "--m", help="Endpoint counts"),
    rho_list: str = typer.Option(
        ",".join(f"{v:g}" for v in PUBLISHED_RHOS), "--rho", help="Common correlations"
    ),
    c_list: str = typer.Option(
        ",".join(f"{v:g}" for v in PUBLISHED_MARGINS), "--c", help="Common margins"
    ),
    d_list: str = typer.Option(
        ",".join(str(v) for v in PUBLISHED_DFS), "--d", help="Degrees of freedom"
    ),
    p: int = typer.Option(1, "--p", help="Endpoints required to be superior", min=1),
    out: Optional[Path] = OUT_OPTION,
):
    """Grid of alpha' over (m, rho, c, d) with exchangeable correlation.

    Examples:
        supnoninf table1 --alpha 0.05 --out table1.csv
        supnoninf --threads 4 table1 --m 3 --rho 0.5
    """
    opts = _options(ctx)
    with _exit_codes():
        ms, rhos = _ints(m_list, "--m"), _floats(rho_list, "--rho")
        cs, ds = _floats(c_list, "--c"), _floats(d_list, "--d")
        rows = table1_grid(ms, rhos, cs, ds, alpha=alpha, p=p, threads=opts.threads)
        parameters = {"alpha": alpha, "m": ms, "rho": rhos, "c": cs, "d": ds, "p": p}
        write_grid_csv(
            rows,
            out,
            digits=opts.digits,
            header=GRID_COLUMNS,
            manifest=_manifest("table1", parameters),
        )
        if not opts.quiet:
            console.print(f"[bold green]✓ Solved {len(rows)} cells[/]")


@app.command()
def figure1(
    ctx: typer.Context,
    m_list: str = typer.Option("2,3", "--m", help="Endpoint counts"),
    rho_list: str = typer.Option("0,0.5", "--rho", help="Common correlations"),
    d: float = typer.Option(100, "--d", help="Degrees of freedom"),
    alpha: float = typer.Option(0.05, "--alpha", help="Overall one-sided level"),
    c_min: float = typer.Option(0.0, "--c-min", help="Smallest margin"),
    c_max: float = typer.Option(5.0, "--c-max", help="Largest margin"),
    steps: int = typer.Option(51, "--steps", help="Grid points per curve", min=2),
    out: Optional[Path] = OUT_OPTION,
):
    """Critical value t_{d,alpha'} against the common margin c (plot data only).

    Examples:
        supnoninf figure1 --m 2,3 --rho 0,0.5 --d 100 --out figure1.csv
    """
    opts = _options(ctx)
    with _exit_codes():
        rows = []
        for m in _ints(m_list, "--m"):
            for rho in _floats(rho_list, "--rho"):
                for point in figure1_curve(m, rho, d, (c_min, c_max), alpha=alpha, steps=steps):
                    rows.append((m, rho, d, alpha, point.c, point.critical_value))
        parameters = {
            "m": m_list,
            "rho": rho_list,
            "d": d,
            "alpha": alpha,
            "c_range": [c_min, c_max],
            "steps": steps,
        }
        write_grid_csv(
            rows,
            out,
            digits=opts.digits,
            header=("m", "rho", "d", "alpha", "c", "critical_value"),
            manifest=_manifest("figure1", parameters),
        )


# =============================================================================
# ANALYSIS COMMANDS
# =============================================================================


@app.command()
def analyze(
    ctx: typer.Context,
    spec: Path = typer.Option(..., "--spec", "-s", help="Analysis spec (JSON)"),
    out: Optional[Path] = OUT_OPTION,
):
    """Analyze a trial from summary statistics or a raw-data CSV.

    Examples:
        supnoninf analyze --spec docs/specs/example2.json
        supnoninf --diagnostics analyze --spec trial.json --out result.json
    """
    opts = _options(ctx)
    with _exit_codes():
        analysis = load_analysis_spec(_load_document(spec))
        result = analyze_spec(analysis, base_dir=spec.parent)
        _summary(
            f"alpha' = {result.alpha_prime:.5g}, critical value = {result.critical_value:.5g}",
            [
                (name, f"{result.t_stats[k]:.4f}", f"{result.ci_lower[k]:.4f}", decision.value)
                for k, (name, decision) in enumerate(zip(result.endpoints, result.decisions))
            ],
            opts,
            columns=("Endpoint", "t", "Lower bound", "Decision"),
        )
        if not opts.quiet:
            verdict = "[bold green]success" if result.overall_success else "[bold red]no success"
            console.print(f"Overall: {verdict}[/]")
        _emit_json(
            result.to_dict(diagnostics=opts.diagnostics),
            "analyze",
            analysis.model_dump(mode="json"),
            opts,
            out,
        )


@app.command()
def rho0(
    ctx: typer.Context,
    matrix: Path = typer.Argument(..., help="Correlation matrix CSV"),
    out: Optional[Path] = OUT_OPTION,
):
    """Common correlation summarizing a correlation matrix.

    Examples:
        supnoninf rho0 corr.csv
    """
    opts = _options(ctx)
    with _exit_codes():
        R = _read_matrix(matrix)
        value = armitage_parmar_rho0(R) if R.dim > 1 else 0.0
        _emit_json({"rho0": value, "m": R.dim}, "rho0", {"matrix": R.to_list()}, opts, out)


@app.command()
def coverage(
    ctx: typer.Context,
    m: int = typer.Option(..., "--m", help="Number of endpoints", min=1),
    c: str = typer.Option(..., "--c", help="Standardized margins, one value or m values"),
    d: float = typer.Option(..., "--d", help="Degrees of freedom"),
    rho: Optional[float] = typer.Option(None, "--rho", help="Common correlation"),
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Correlation matrix CSV"),
    alpha: float = typer.Option(0.05, "--alpha", help="Overall one-sided level"),
    p: int = typer.Option(1, "--p", help="Endpoints required to be superior", min=1),
    reps: int = typer.Option(100_000, "--reps", help="Simulated trials", min=1),
    seed: int = typer.Option(20100908, "--seed", help="Simulation seed"),
    out: Optional[Path] = OUT_OPTION,
):
    """Simulated joint coverage of the simultaneous lower bounds.

    Examples:
        supnoninf coverage --m 2 --rho 0.5 --c 2 --d 100 --reps 200000
    """
    opts = _options(ctx)
    with _exit_codes():
        margins = _margins(c, m)
        R = _correlation(m, rho, matrix)
        solution = solve_adjusted_alpha(m, margins, R, d, SolverConfig(alpha=alpha, p=p))
        result = simulate_ci_coverage(
            margins, R, d, solution.alpha_prime, reps, seed, p=p, threads=opts.threads
        )
        parameters = {
            "m": m,
            "c": margins.to_list(),
            "d": d,
            "correlation": R.to_list(),
            "alpha": alpha,
            "p": p,
            "reps": reps,
        }
        _emit_json(result.to_dict(), "coverage", parameters, opts, out, seed=seed)


# =============================================================================
# DESIGN COMMANDS
# =============================================================================


def _power_document(path: Path) -> PowerDocument:
    return validate_spec(_load_document(path), PowerDocument, power_semantic_errors)


@app.command()
def power(
    ctx: typer.Context,
    spec: Path = typer.Option(..., "--spec", "-s", help="Design spec (JSON)"),
    monte_carlo: bool = typer.Option(False, "--monte-carlo", help="Simulate instead"),
    out: Optional[Path] = OUT_OPTION,
):
    """Power of the unified test at an assumed alternative.

    Examples:
        supnoninf power --spec design.json
        supnoninf power --spec design.json --monte-carlo
    """
    opts = _options(ctx)
    with _exit_codes():
        document = _power_document(spec)
        power_spec = document.to_power_spec()
        if monte_carlo:
            result = mc_power(
                power_spec, reps=document.mc_reps, seed=document.seed, threads=opts.threads
            )
        else:
            result = analytic_power(power_spec, reps=document.mc_reps, seed=document.seed)
        _summary(
            "Power",
            [("power", f"{result.power:.4f}"), ("alpha'", f"{result.alpha_prime:.5g}")],
            opts,
        )
        _emit_json(
            result.to_dict(diagnostics=opts.diagnostics),
            "power",
            document.model_dump(mode="json"),
            opts,
            out,
            seed=document.seed,
        )


@app.command("sample-size")
def sample_size(
    ctx: typer.Context,
    spec: Path = typer.Option(..., "--spec", "-s", help="Design spec with target_power"),
    out: Optional[Path] = OUT_OPTION,
):
    """Smallest group sizes reaching the target power.

    Examples:
        supnoninf sample-size --spec design.json
    """
    opts = _options(ctx)
    with _exit_codes():
        document = _power_document(spec)
        if document.target_power is None:
            raise SpecValidationError(
                [{"pointer": "/target_power", "message": "sample-size needs target_power"}]
            )
        result = min_sample_size(
            document.to_power_spec(),
            document.target_power,
            allocation_ratio=document.allocation_ratio,
            max_n=document.max_n,
            reps=document.mc_reps,
            seed=document.seed,
        )
        _summary(
            "Sample size",
            [
                ("n_trt", result.n_trt),
                ("n_ctl", result.n_ctl),
                ("power", f"{result.power.power:.4f}"),
            ],
            opts,
        )
        _emit_json(
            result.to_dict(),
            "sample-size",
            document.model_dump(mode="json"),
            opts,
            out,
            seed=document.seed,
        )


# =============================================================================
# SIMULATION COMMANDS
# =============================================================================


@app.command()
def simulate(
    ctx: typer.Context,
    scenarios: Optional[Path] = typer.Option(
        None, "--scenarios", help="JSON list of scenarios (or a single scenario)"
    ),
    table: Optional[int] = typer.Option(None, "--table", help="Published study: 2 or 3"),
    reps: int = typer.Option(10_000, "--reps", help="Replicates per scenario (--table)", min=1),
    seed: int = typer.Option(20100908, "--seed", help="Scenario seed (--table)"),
    boot_reps: Optional[int] = typer.Option(None, "--boot-reps", help="Bootstrap replicates"),
    scale: DesignMarginScale = typer.Option(
        DesignMarginScale.EFFECT,
        "--scale",
        help="How margins enter the alpha' solve (--table); nominal is a diagnostic",
    ),
    methods: Optional[str] = typer.Option(None, "--methods", help="e.g. UNIFIED,PW"),
    out: Optional[Path] = OUT_OPTION,
):
    """Simulate rejection rates of the unified test and its comparators.

    Examples:
        supnoninf --threads 8 simulate --table 2 --out table2.csv
        supnoninf simulate --scenarios study.json --out report.csv
    """
    opts = _options(ctx)
    with _exit_codes():
        if (scenarios is None) == (table is None):
            raise typer.BadParameter("give exactly one of --scenarios and --table")
        selected = None
        if methods:
            try:
                selected = [Method(name.strip().upper()) for name in methods.split(",")]
            except ValueError:
                raise typer.BadParameter(f"unknown method in {methods!r}", param_hint="--methods")

        if scenarios is not None:
            document = _load_document(scenarios)
            if isinstance(document, dict):
                document = [document]
            items: List[SimScenario] = validate_spec(document, ScenarioFile).root
            if selected:
                items = [item.model_copy(update={"methods": selected}) for item in items]
        elif table == 2:
            items = table2_scenarios(reps, seed, scale, boot_reps, selected)
        elif table == 3:
            items = table3_scenarios(reps, seed, scale, boot_reps, selected)
        else:
            raise typer.BadParameter("--table must be 2 or 3", param_hint="--table")

        reports = run_scenarios(items, threads=opts.threads)
        parameters = {"scenarios": [item.model_dump(mode="json") for item in items]}
        write_report_csv(
            reports, out, digits=opts.digits, manifest=_manifest("simulate", parameters)
        )
        if not opts.quiet:
            table_view = Table(title="Rejection rates")
            table_view.add_column("Scenario", style="cyan")
            for method in reports[0].methods if reports else []:
                table_view.add_column(method.method.value)
            for report in reports:
                table_view.add_row(
                    report.scenario.scenario_id, *(f"{r.rate:.3f}" for r in report.methods)
                )
            console.print(table_view)
        partial = [report for report in reports if report.status != "complete"]
        if partial:
            typer.echo(
                json.dumps(
                    {
                        "error": "PARTIAL_REPORT",
                        "message": f"{len(partial)} scenario(s) aborted",
                        "details": {r.scenario.scenario_id: r.error for r in partial},
                    },
                    default=str,
                ),
                err=True,
            )
            raise typer.Exit(EXIT_NUMERICAL)


# =============================================================================
# SPEC COMMANDS
# =============================================================================


def _spec_model(kind: str) -> Type[BaseModel]:
    if kind not in SPEC_KINDS:
        raise typer.BadParameter(
            f"kind must be one of {', '.join(SPEC_KINDS)}", param_hint="--kind"
        )
    return SPEC_KINDS[kind]


@app.command()
def validate(
    spec: Path = typer.Argument(..., help="Spec document (JSON)"),
    kind: str = typer.Option("analysis", "--kind", "-k", help="analysis, power or scenarios"),
):
    """Validate a spec and echo it with defaults filled in.

    Every violation is reported at once, each with a JSON pointer.

    Examples:
        supnoninf validate docs/specs/example1.json
        supnoninf validate design.json --kind power
    """
    model = _spec_model(kind)
    checks = {"analysis": analysis_semantic_errors, "power": power_semantic_errors}.get(kind)
    with _exit_codes():
        normalized = validate_spec(_load_document(spec), model, checks)
        write_json(normalized.model_dump(mode="json"))


@app.command()
def schema(
    kind: str = typer.Option("analysis", "--kind", "-k", help="analysis, power or scenarios"),
):
    """Print the JSON Schema of a spec document.

    Examples:
        supnoninf schema --kind power
    """
    write_json(_spec_model(kind).model_json_schema())


@app.command()
def version():
    """Show package and numerical library versions."""
    write_json(tool_versions())


if __name__ == "__main__":
    app()
