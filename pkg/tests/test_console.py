"""Tests for the pure presentation helpers in the UI layer."""
from __future__ import annotations

from rich.console import Console

from wulffcap.checks import CheckReport
from wulffcap.ui.console import banner, fmt_float, print_banner, print_mapping, print_step, print_summary, summary_table


def _console() -> Console:
    return Console(record=True, width=120, color_system=None)


def test_fmt_float():
    assert fmt_float(None) == "—"
    assert fmt_float(1.5e-9) == "1.500e-09"


def test_banner_shows_run_settings():
    assert banner() is not None
    console = _console()
    print_banner(console, {"level": 4, "ladder": "3,4,5", "identity tol": 1e-6})
    text = console.export_text()
    assert "level 4" in text
    assert "ladder 3,4,5" in text
    assert "identity tol 1.000e-06" in text


def test_step_lines():
    console = _console()
    print_step(console, "hsiung-minkowski", True, "residual 1.0e-10")
    print_step(console, "heintze-karcher", False)
    text = console.export_text()
    assert "✓ hsiung-minkowski  residual 1.0e-10" in text
    assert "✗ heintze-karcher" in text


def test_summary_counts_passes():
    reports = [
        CheckReport("support-constancy", "wulff", "pass", 1e-12, 1e-8),
        CheckReport("heintze-karcher", "perturbed", "fail", 0.2, 1e-6),
    ]
    assert summary_table(reports).row_count == 2
    console = _console()
    print_summary(console, reports, 1.25)
    assert "1/2 checks passed" in console.export_text()


def test_mapping_panel():
    console = _console()
    print_mapping(console, "minkowski1d", {"verdict": "unique", "residual": 3.0e-11})
    text = console.export_text()
    assert "unique" in text and "3e-11" in text
