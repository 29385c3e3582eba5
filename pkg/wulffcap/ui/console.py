"""Terminal presentation for the ``wulffcap`` command.

A wordmark banner, one ✓/✗ line per check, and a closing summary table.
Nothing here decides a verdict; it only renders :class:`CheckReport` objects.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Sequence

import humanize
from rich.align import Align
from rich.console import Console, Group
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .. import __version__
from ..checks import CheckReport

_WORDMARK = r"""
▗▖ ▗▖▗▖ ▗▖▗▖   ▗▄▄▄▖▗▄▄▄▖ ▗▄▄▖ ▗▄▖ ▗▄▄▖
▐▌ ▐▌▐▌ ▐▌▐▌   ▐▌   ▐▌   ▐▌   ▐▌ ▐▌▐▌ ▐▌
▐▌ ▐▌▐▌ ▐▌▐▌   ▐▛▀▀▘▐▛▀▀▘▐▌   ▐▛▀▜▌▐▛▀▘
▐▙█▟▌▝▚▄▞▘▐▙▄▄▖▐▌   ▐▌   ▝▚▄▄▖▐▌ ▐▌▐▌
""".strip("\n")

PASS_STYLE = "bold #2effa8"
FAIL_STYLE = "bold #ff5f6d"
MUTED = "#6b7394"
ACCENT = "#b7c4ff"


def banner(settings: Mapping[str, Any] | None = None) -> Panel:
    """Wordmark panel; ``settings`` (level, ladder, tolerances) go in a line under the tagline."""
    wordmark = Text(_WORDMARK, style=f"bold {ACCENT}", justify="left")
    tagline = Text("anisotropic capillary Minkowski identities, checked numerically", style=f"italic {MUTED}")
    rows = [Align.center(wordmark), Align.center(Text()), Align.center(tagline)]
    if settings:
        line = Text()
        for index, (key, value) in enumerate(settings.items()):
            if index:
                line.append("  ·  ", style=MUTED)
            line.append(f"{key} ", style=MUTED)
            line.append(fmt_float(value) if isinstance(value, float) else str(value), style=ACCENT)
        rows.append(Align.center(line))
    version = Text(f"v{__version__}", style=PASS_STYLE)
    return Panel(Group(*rows), border_style="#24304a", title=version, title_align="right", padding=(1, 4))


def print_banner(console: Console, settings: Mapping[str, Any] | None = None) -> None:
    console.print(banner(settings))


def fmt_float(value: float | None) -> str:
    return "—" if value is None else f"{value:.3e}"


def print_step(console: Console, label: str, passed: bool, detail: str = "") -> None:
    line = Text("  ✓ ", style=PASS_STYLE) if passed else Text("  ✗ ", style=FAIL_STYLE)
    line.append(label, style=MUTED)
    if detail:
        line.append(f"  {detail}", style=ACCENT)
    console.print(line)


def print_report_step(console: Console, label: str, report: CheckReport) -> None:
    detail = f"residual {fmt_float(report.residual)}"
    if report.fit is not None:
        detail += f", order {report.fit.label}"
    print_step(console, label, report.passed, detail)


@dataclass
class StepOutcome:
    passed: bool = True
    detail: str = ""


@contextmanager
def check_step(console: Console, label: str) -> Iterator[StepOutcome]:
    """Spinner while a check runs, then a ✓/✗ line from the outcome the caller filled in."""
    outcome = StepOutcome()
    with console.status(Text(label, style=ACCENT), spinner="dots", spinner_style="#00f0ff"):
        try:
            yield outcome
        except Exception:
            print_step(console, label, False, "error")
            raise
    print_step(console, label, outcome.passed, outcome.detail)


def summary_table(reports: Sequence[CheckReport]) -> Table:
    table = Table(border_style="#24304a", header_style=f"bold {ACCENT}", expand=False)
    table.add_column("check")
    table.add_column("case", style=MUTED, overflow="fold")
    table.add_column("verdict")
    table.add_column("residual", justify="right")
    table.add_column("tolerance", justify="right", style=MUTED)
    table.add_column("order", justify="right")
    for report in reports:
        verdict = Text(report.verdict, style=PASS_STYLE if report.passed else FAIL_STYLE)
        order = "" if report.fit is None else report.fit.label
        table.add_row(report.check_id, report.case, verdict, fmt_float(report.residual), fmt_float(report.tolerance), order)
    return table


def print_summary(console: Console, reports: Sequence[CheckReport], elapsed: float) -> None:
    passed = sum(1 for report in reports if report.passed)
    console.print()
    console.print(summary_table(reports))
    line = Text("  ● ", style=PASS_STYLE if passed == len(reports) else FAIL_STYLE)
    line.append(f"{passed}/{len(reports)} checks passed", style=ACCENT)
    line.append(f" in {humanize.precisedelta(elapsed, minimum_unit='milliseconds', format='%0.0f')}", style=MUTED)
    console.print(line)
    console.print()


def print_mapping(console: Console, title: str, payload: Mapping[str, Any]) -> None:
    """Key/value panel for solver and experiment results."""
    table = Table.grid(padding=(0, 2))
    table.add_column(style=ACCENT)
    table.add_column()
    for key, value in payload.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        elif isinstance(value, int) and not isinstance(value, bool):
            value = humanize.intcomma(value)
        table.add_row(str(key), str(value))
    console.print(Panel(table, title=title, title_align="left", border_style="#24304a", padding=(1, 2)))
