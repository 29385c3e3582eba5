"""JSON and CSV emission for check runs and solver results.

Reports carry no timestamps and are written in a fixed order, so the same
configuration and seed produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import SCHEMA_VERSION, __version__
from .capillary import CapillarySurface
from .checks import CheckReport
from .config import RunConfig
from .logging import get_logger

LOG = get_logger(__name__)

LADDER_COLUMNS = ("check", "case", "level", "nodes", "lhs", "rhs", "residual", "order")


def _finite(value: Any) -> Any:
    """JSON has no inf/nan; encode them as strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, Mapping):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value


def build_payload(run: RunConfig, reports: Sequence[CheckReport]) -> dict[str, Any]:
    ordered = sort_reports(reports)
    passed = sum(1 for report in ordered if report.passed)
    return _finite(
        {
            "schema_version": SCHEMA_VERSION,
            "wulffcap_version": __version__,
            "run": run.to_payload(),
            "summary": {"checks": len(ordered), "passed": passed, "failed": len(ordered) - passed},
            "reports": [report.to_payload() for report in ordered],
        }
    )


def sort_reports(reports: Iterable[CheckReport]) -> list[CheckReport]:
    """Stable order by check id; reports of one check keep their submission order."""
    return sorted(reports, key=lambda report: report.check_id)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def write_report(path: Path, run: RunConfig, reports: Sequence[CheckReport]) -> Path:
    path = Path(path).expanduser()
    _atomic_write(path, dumps(build_payload(run, reports)))
    LOG.info("wrote report with %d checks to %s", len(reports), path)
    return path


def write_json(path: Path, payload: Mapping[str, Any]) -> Path:
    path = Path(path).expanduser()
    _atomic_write(path, dumps(_finite(dict(payload))))
    LOG.info("wrote %s", path)
    return path


def ladder_rows(reports: Sequence[CheckReport]) -> list[dict[str, Any]]:
    rows = []
    for report in sort_reports(reports):
        order = "" if report.fit is None else report.fit.label
        for level in report.ladder:
            rows.append(
                {
                    "check": report.check_id,
                    "case": report.case,
                    "level": level.level,
                    "nodes": level.nodes,
                    "lhs": repr(level.lhs),
                    "rhs": repr(level.rhs),
                    "residual": repr(level.residual),
                    "order": order,
                }
            )
    return rows


def ladder_csv(reports: Sequence[CheckReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=LADDER_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(ladder_rows(reports))
    return buffer.getvalue()


def write_ladders(directory: Path, reports: Sequence[CheckReport]) -> Path | None:
    """One ``ladders.csv`` with every ladder level; ``None`` when no report carries a ladder."""
    if not any(report.ladder for report in reports):
        return None
    path = Path(directory).expanduser() / "ladders.csv"
    _atomic_write(path, ladder_csv(reports))
    LOG.info("wrote ladder table to %s", path)
    return path


def node_csv(cap: CapillarySurface) -> str:
    """Per-node ``X``, ``nu``, ``kappa^F`` and quadrature weight."""
    geometry = cap.surface.nodes
    d, n = cap.surface.ambient_dim, cap.dim
    header = (
        [f"x{i}" for i in range(d)]
        + [f"nu{i}" for i in range(d)]
        + [f"kappa{i}" for i in range(n)]
        + ["u_bar", "weight"]
    )
    table = np.column_stack(
        [geometry.position, geometry.normal, cap.curvature.kappa, cap.fields.support, cap.surface.weights]
    )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[repr(float(v)) for v in row] for row in table])
    return buffer.getvalue()


def write_nodes(path: Path, cap: CapillarySurface) -> Path:
    path = Path(path).expanduser()
    _atomic_write(path, node_csv(cap))
    LOG.info("wrote %d nodes of %s to %s", cap.surface.node_count, cap.surface.name, path)
    return path
