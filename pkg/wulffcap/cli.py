"""Command-line entry point for wulffcap.

``verify`` and ``ladder`` run identity/inequality checks on catalog surfaces,
``solve minkowski1d`` and ``experiment uniqueness`` drive the 1-D solver.  The
exit status is 0 exactly when every verdict passes.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np
from rich.console import Console

from . import __version__
from .catalog import (
    CHECKS,
    NORMS,
    SURFACES,
    CheckRequest,
    SuiteEntry,
    SurfaceRequest,
    default_suite,
    get_check,
    run_check,
    surface_case,
)
from .checks import RELATION_KINDS, CheckReport, TolerancePolicy
from .config import AppConfig, NormConfig, RunConfig, load_config
from .errors import UsageError, WulffcapError
from .logging import check_context, get_logger, set_level
from .reports import write_json, write_ladders, write_nodes, write_report
from .solver import (
    CapillaryBVP,
    manufactured_profile,
    scaling_covariance,
    solve as solve_bvp,
    uniqueness_experiment,
)
from .surfaces import PROFILES
from .ui import console as ui
from .weights import WEIGHTS, get_weight

LOG = get_logger(__name__)

BUILTIN_PHI = ("const", "cap", "bumped", "tilted")


@dataclass
class Session:
    console: Console
    config: AppConfig
    show_banner: bool

    def banner(self, run: RunConfig) -> None:
        if not self.show_banner:
            return
        tolerances = run.tolerances(self.config.tolerances)
        settings = {"command": run.command, "seed": run.seed, "identity tol": tolerances.identity}
        if run.command in ("verify", "ladder"):
            settings = {"level": run.level, "ladder": ",".join(map(str, run.levels)), **settings}
        ui.print_banner(self.console, settings)


def _parse_levels(ctx: click.Context, param: click.Parameter, value: str | None) -> list[int] | None:
    if value is None:
        return None
    try:
        levels = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list such as 3,4,5") from None
    if len(levels) < 3 or any(level < 1 for level in levels):
        raise click.BadParameter("a ladder needs at least three positive levels")
    return sorted(levels)


def _parse_overrides(ctx: click.Context, param: click.Parameter, value: tuple[str, ...]) -> dict[str, float]:
    overrides: dict[str, float] = {}
    for item in value:
        key, sep, number = item.partition("=")
        try:
            if not sep:
                raise ValueError
            overrides[key.strip()] = float(number)
        except ValueError:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}") from None
    return overrides


def _guarded(func: Callable[[], Any]) -> Any:
    """Run ``func`` and turn library errors into clean CLI failures."""
    try:
        return func()
    except UsageError as exc:
        raise click.UsageError(str(exc)) from None
    except WulffcapError as exc:
        LOG.error("%s: %s", type(exc).__name__, exc)
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from None


def _error_report(check_id: str, label: str, exc: Exception) -> CheckReport:
    LOG.error("%s on %s raised %s: %s", check_id, label, type(exc).__name__, exc)
    return CheckReport(check_id, label, "error", None, None, details={"error": f"{type(exc).__name__}: {exc}"})


def _run_entry(entry: SuiteEntry, policy: TolerancePolicy) -> CheckReport:
    start = time.perf_counter()
    with check_context(entry.check_id, entry.label):
        try:
            report = entry.run(policy)
        except WulffcapError as exc:
            report = _error_report(entry.check_id, entry.label, exc)
        report.elapsed = time.perf_counter() - start
        LOG.info("%s (residual %s) in %.2fs", report.verdict, report.residual, report.elapsed)
    return report


def _run_entries(session: Session, entries: list[SuiteEntry], policy: TolerancePolicy, jobs: int) -> list[CheckReport]:
    console = session.console
    if jobs <= 1:
        reports = []
        for entry in entries:
            label = f"{entry.check_id}  {entry.label}"
            with ui.check_step(console, label) as outcome:
                report = _run_entry(entry, policy)
                outcome.passed = report.passed
                outcome.detail = f"residual {ui.fmt_float(report.residual)}" if report.residual is not None else report.verdict
            reports.append(report)
        return reports
    reports = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for entry, report in zip(entries, pool.map(lambda e: _run_entry(e, policy), entries)):
            ui.print_report_step(console, f"{entry.check_id}  {entry.label}", report)
            reports.append(report)
    return reports


def _emit(session: Session, run: RunConfig, reports: list[CheckReport], elapsed: float) -> None:
    ui.print_summary(session.console, reports, elapsed)
    if run.report_path:
        write_report(Path(run.report_path), run, reports)
    if run.csv_dir:
        write_ladders(Path(run.csv_dir), reports)


def _run_config(session: Session, command: str, target: str, parameters: dict[str, Any], **options: Any) -> RunConfig:
    config = session.config
    levels = options.get("levels") or list(config.ladder.levels)
    level = options.get("level") or config.ladder.level
    seed = options.get("seed")
    return RunConfig(
        command=command,
        target=target,
        parameters=parameters,
        levels=levels,
        level=level,
        tolerance_overrides=options.get("overrides") or {},
        report_path=str(options["report"]) if options.get("report") else None,
        csv_dir=str(options["csv_dir"]) if options.get("csv_dir") else None,
        seed=config.output.seed if seed is None else seed,
        jobs=options.get("jobs") or config.output.jobs,
    )


# ---------------------------------------------------------------------------
# Shared options
# ---------------------------------------------------------------------------
def _surface_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--surface", default=None, help=f"Catalog surface ({', '.join(SURFACES)})"),
        click.option("--norm", default="ellipsoid", show_default=True, help=f"Catalog norm ({', '.join(NORMS)}) or a JSON norm file"),
        click.option("--dim", default=3, type=click.IntRange(2, 3), show_default=True, help="Ambient dimension n+1"),
        click.option("--r0", default=1.0, type=float, show_default=True, help="Wulff radius"),
        click.option("--omega0", default=-0.3, type=float, show_default=True, help="Wetting constant"),
        click.option("--eps", default=0.05, type=float, show_default=True, help="Perturbation amplitude"),
        click.option("--psi-mode", default="cos", type=click.Choice(PROFILES), show_default=True, help="Perturbation profile"),
        click.option("--theta", default=math.pi / 3, type=float, show_default=True, help="Contact angle (caps, solver)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--level", default=None, type=click.IntRange(1, 8), help="Refinement level for single-level checks"),
        click.option("--levels", default=None, callback=_parse_levels, help="Ladder levels, e.g. 3,4,5"),
        click.option("--report", default=None, type=click.Path(dir_okay=False, path_type=Path), help="Write the JSON report here"),
        click.option("--csv", "csv_dir", default=None, type=click.Path(file_okay=False, path_type=Path), help="Write ladder CSV into this directory"),
        click.option("--jobs", default=None, type=click.IntRange(1, 256), help="Concurrent checks"),
        click.option("--seed", default=None, type=int, help="Seed for sweeps and multi-starts"),
        click.option("--tol", "overrides", multiple=True, callback=_parse_overrides, help="Tolerance override KEY=VALUE"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _check_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--f", "weight", default="const", show_default=True, help=f"Weight function ({', '.join(WEIGHTS)})"),
        click.option("--k", default=None, type=int, help="Curvature index (default: every admissible k)"),
        click.option("--relation", default="soliton", show_default=True, help=f"Relation kind ({', '.join(RELATION_KINDS)})"),
        click.option("--samples", default=10_000, type=click.IntRange(1), show_default=True, help="Random instances for algebraic sweeps"),
        click.option("--p", default=3.0, type=float, show_default=True, help="Solver exponent"),
        click.option("--nodes", "nodes_csv", default=None, type=click.Path(dir_okay=False, path_type=Path), help="Dump node data of the surface as CSV"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False, path_type=Path), help="Configuration file")
@click.option("--log-level", default=None, type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.option("--no-banner", is_flag=True, help="Skip the startup banner")
@click.version_option(__version__, "-v", "--version", message="wulffcap %(version)s")
@click.pass_context
def main(ctx: click.Context, config_path: Path | None, log_level: str | None, no_banner: bool) -> None:
    """Numerical checks of anisotropic capillary Minkowski-type formulas."""
    if log_level:
        set_level(log_level.upper())
    ctx.obj = Session(Console(), load_config(config_path), not no_banner)


@main.command("list")
@click.pass_obj
def list_catalog(session: Session) -> None:
    """List checks, surfaces, norms, weights and relation kinds."""
    console = session.console
    ui.print_mapping(console, "checks", {spec.check_id: spec.summary for spec in CHECKS.values()})
    ui.print_mapping(
        console,
        "catalog",
        {
            "surfaces": ", ".join(SURFACES),
            "norms": ", ".join(NORMS),
            "weights": ", ".join(WEIGHTS),
            "relations": ", ".join(RELATION_KINDS),
            "solver phi": ", ".join(BUILTIN_PHI),
        },
    )


def _check_request(check_id: str, ladder: bool, norms: NormConfig, **opts: Any) -> CheckRequest:
    spec = get_check(check_id)
    surface = opts["surface"] or spec.default_surface or "capillary-wulff"
    if surface not in SURFACES:
        raise UsageError(f"unknown surface {surface!r}; valid: {', '.join(sorted(SURFACES))}")
    request = SurfaceRequest(
        surface, opts["norm"], opts["dim"], opts["r0"], opts["omega0"], opts["eps"], opts["psi_mode"], opts["theta"],
        step=norms.derivative_step, admissibility_nodes=norms.nodes_for(opts["dim"]),
    )
    surface_case(request)
    get_weight(opts["weight"])
    if opts["relation"] not in RELATION_KINDS:
        raise UsageError(f"unknown relation {opts['relation']!r}; valid: {', '.join(RELATION_KINDS)}")
    return CheckRequest(request, opts["weight"], opts["k"], opts["relation"], opts["samples"], opts["p"], ladder)


def _verify(session: Session, check_id: str, ladder: bool, opts: dict[str, Any]) -> list[CheckReport]:
    run = _run_config(
        session,
        "ladder" if ladder else "verify",
        check_id,
        {key: value for key, value in opts.items() if key in _PARAMETER_KEYS and value is not None},
        **opts,
    )
    policy = TolerancePolicy.from_config(session.config, run)
    session.banner(run)
    start = time.perf_counter()
    if check_id == "all":
        entries = default_suite(session.config.solver)
    else:
        request = _guarded(lambda: _check_request(check_id, ladder, session.config.norms, **opts))
        request = replace(request, solver=session.config.solver)
        entries = [
            SuiteEntry(check_id, request.surface.label(), lambda policy, request=request: _single(check_id, request, policy))
        ]
        if opts.get("nodes_csv"):
            case = _guarded(lambda: surface_case(request.surface))
            _guarded(lambda: write_nodes(opts["nodes_csv"], case.build(policy.level)))
    reports = _run_entries(session, entries, policy, run.jobs)
    _emit(session, run, reports, time.perf_counter() - start)
    return reports


_PARAMETER_KEYS = ("surface", "norm", "dim", "r0", "omega0", "eps", "psi_mode", "theta", "weight", "k", "relation", "samples", "p")


def _single(check_id: str, request: CheckRequest, policy: TolerancePolicy) -> CheckReport:
    """Run one check id; several k values are folded into the worst report."""
    reports = run_check(check_id, request, policy)
    failing = [report for report in reports if not report.passed]
    chosen = failing[0] if failing else max(reports, key=lambda report: report.residual or 0.0)
    if len(reports) > 1:
        chosen.details = {**chosen.details, "runs": [report.to_payload() for report in reports]}
    return chosen


@main.command()
@click.argument("check_id")
@_surface_options
@_check_options
@_run_options
@click.pass_obj
def verify(session: Session, check_id: str, **opts: Any) -> None:
    """Run CHECK_ID (or ``all``) and exit 0 iff every verdict passes."""
    if check_id != "all":
        _guarded(lambda: get_check(check_id))
    reports = _verify(session, check_id, False, opts)
    raise SystemExit(0 if all(report.passed for report in reports) else 1)


@main.command()
@click.argument("check_id")
@_surface_options
@_check_options
@_run_options
@click.pass_obj
def ladder(session: Session, check_id: str, **opts: Any) -> None:
    """Run CHECK_ID over the refinement ladder and write its CSV table."""
    _guarded(lambda: get_check(check_id))
    if not opts.get("csv_dir"):
        opts["csv_dir"] = session.config.output.report_dir
    reports = _verify(session, check_id, True, opts)
    raise SystemExit(0 if all(report.passed for report in reports) else 1)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------
def _bvp(session: Session, phi: str, p: float, theta: float, grid: int) -> CapillaryBVP:
    solver = session.config.solver
    options = {"max_iterations": solver.max_iterations, "tolerance": solver.tolerance, "damping_floor": solver.damping_floor}
    if phi == "const":
        return CapillaryBVP.from_function(theta, p, 1.0, grid, **options)
    if phi in BUILTIN_PHI:
        return CapillaryBVP.manufactured(manufactured_profile(phi, theta), p, grid, **options)
    path = Path(phi).expanduser()
    if not path.is_file():
        raise UsageError(f"unknown phi {phi!r}; valid: {', '.join(BUILTIN_PHI)} or a file of grid values")
    values = np.load(path) if path.suffix == ".npy" else np.loadtxt(path)
    return CapillaryBVP(theta, p, np.asarray(values, dtype=float).ravel(), **options)


def _uniqueness(session: Session, bvp: CapillaryBVP, starts: int, seed: int) -> dict[str, Any]:
    report = uniqueness_experiment(bvp, starts, seed=seed)
    payload = {**bvp.describe(), **report.to_payload()}
    payload["scaling_covariance"] = scaling_covariance(bvp, 2.0)
    return payload


def _solver_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--p", default=3.0, type=float, show_default=True, help="Exponent p >= 1"),
        click.option("--theta", default=math.pi / 3, type=float, show_default=True, help="Contact angle"),
        click.option("--phi", default="bumped", show_default=True, help=f"Right-hand side ({', '.join(BUILTIN_PHI)} or a file)"),
        click.option("--N", "--grid", "grid", default=None, type=click.IntRange(8), help="Grid cells (even)"),
        click.option("--seed", default=None, type=int, help="Seed for random starts"),
        click.option("--report", default=None, type=click.Path(dir_okay=False, path_type=Path), help="Write the JSON result here"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _finish(session: Session, title: str, run: RunConfig, payload: dict[str, Any], passed: bool) -> None:
    shown = {key: value for key, value in payload.items() if not isinstance(value, (list, dict))}
    ui.print_mapping(session.console, title, shown)
    if run.report_path:
        write_json(Path(run.report_path), {"run": run.to_payload(), "result": payload})
    raise SystemExit(0 if passed else 1)


@main.group("solve")
def solve_group() -> None:
    """Numerical solvers."""


@solve_group.command("minkowski1d")
@_solver_options
@click.option("--starts", default=None, type=click.IntRange(2), help="Also run a multi-start uniqueness experiment")
@click.pass_obj
def minkowski1d(session: Session, p: float, theta: float, phi: str, grid: int | None, seed: int | None, report: Path | None, starts: int | None) -> None:
    """Solve the 1-D capillary L_p Minkowski problem."""
    grid = grid or session.config.solver.grid
    parameters = {"p": p, "theta": theta, "phi": phi, "grid": grid, "starts": starts}
    run = _run_config(session, "solve minkowski1d", phi, parameters, report=report, seed=seed)
    session.banner(run)
    bvp = _guarded(lambda: _bvp(session, phi, p, theta, grid))
    with session.console.status("solving", spinner="dots"):
        result = _guarded(lambda: solve_bvp(bvp))
    payload: dict[str, Any] = {**bvp.describe(), **result.to_payload(), "u": result.u.tolist()}
    if phi in BUILTIN_PHI[1:]:
        payload["max_error"] = result.max_error(manufactured_profile(phi, theta).u)
    passed = True
    if starts:
        experiment = _guarded(lambda: _uniqueness(session, bvp, starts, run.seed))
        payload.update({f"uniqueness_{key}": value for key, value in experiment.items() if key not in bvp.describe()})
        passed = experiment["verdict"] in ("unique", "scaling-family")
    _finish(session, "minkowski1d", run, payload, passed)


@main.group("experiment")
def experiment_group() -> None:
    """Numerical experiments."""


@experiment_group.command("uniqueness")
@_solver_options
@click.option("--starts", default=None, type=click.IntRange(2), help="Number of random starts")
@click.pass_obj
def uniqueness(session: Session, p: float, theta: float, phi: str, grid: int | None, seed: int | None, report: Path | None, starts: int | None) -> None:
    """Multi-start uniqueness experiment for the 1-D solver."""
    grid = grid or session.config.solver.grid
    starts = starts or session.config.solver.starts
    parameters = {"p": p, "theta": theta, "phi": phi, "grid": grid, "starts": starts}
    run = _run_config(session, "experiment uniqueness", phi, parameters, report=report, seed=seed)
    session.banner(run)
    bvp = _guarded(lambda: _bvp(session, phi, p, theta, grid))
    with session.console.status(f"{starts} starts", spinner="dots"):
        payload = _guarded(lambda: _uniqueness(session, bvp, starts, run.seed))
    _finish(session, "uniqueness", run, payload, payload["verdict"] in ("unique", "scaling-family"))


if __name__ == "__main__":
    main()
