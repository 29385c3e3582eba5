from __future__ import annotations

import json
import math

from wulffcap import SCHEMA_VERSION
from wulffcap.checks import CheckReport, LadderLevel
from wulffcap.config import RunConfig
from wulffcap.quadrature import convergence_fit
from wulffcap.reports import build_payload, dumps, ladder_csv, node_csv, write_ladders, write_report


def _reports() -> list[CheckReport]:
    ladder = [LadderLevel(level, 4**level, 1.0, 1.0 + 4.0**-level, 4.0**-level) for level in (3, 4, 5)]
    fit = convergence_fit([level.residual for level in ladder], None, [2.0**-level.level for level in ladder])
    return [
        CheckReport("support-constancy", "wulff", "pass", 1e-12, 1e-8),
        CheckReport("hsiung-minkowski", "wulff", "pass", 1e-9, 1e-6, 1.0, 1.0, ladder=ladder, fit=fit),
        CheckReport("heintze-karcher", "broken", "error", math.nan, None, details={"error": "boom"}),
    ]


def test_payload_is_sorted_and_counted():
    payload = build_payload(RunConfig("verify", "all"), _reports())
    assert payload["schema_version"] == SCHEMA_VERSION
    assert [report["check"] for report in payload["reports"]] == [
        "heintze-karcher",
        "hsiung-minkowski",
        "support-constancy",
    ]
    assert payload["summary"] == {"checks": 3, "passed": 2, "failed": 1}
    assert payload["reports"][0]["residual"] == "nan"


def test_payload_is_reproducible():
    run = RunConfig("verify", "all", parameters={"k": 1, "f": "u"}, seed=3)
    first = dumps(build_payload(run, _reports()))
    second = dumps(build_payload(run, list(reversed(_reports()))))
    assert first == second
    json.loads(first)


def test_write_report_is_atomic(tmp_path):
    path = write_report(tmp_path / "out" / "report.json", RunConfig("verify"), _reports())
    assert path.exists()
    assert not (tmp_path / "out" / "report.json.tmp").exists()
    assert json.loads(path.read_text())["summary"]["checks"] == 3


def test_ladder_table(tmp_path):
    text = ladder_csv(_reports())
    lines = text.splitlines()
    assert lines[0] == "check,case,level,nodes,lhs,rhs,residual,order"
    assert len(lines) == 4
    assert lines[1].startswith("hsiung-minkowski,wulff,3,64,")
    assert lines[1].endswith(",2.00")
    assert write_ladders(tmp_path, _reports()) == tmp_path / "ladders.csv"
    assert write_ladders(tmp_path, _reports()[:1]) is None


def test_node_table(wulff_case):
    cap = wulff_case.build(3)
    lines = node_csv(cap).splitlines()
    assert lines[0] == "x0,x1,x2,nu0,nu1,nu2,kappa0,kappa1,u_bar,weight"
    assert len(lines) == cap.surface.node_count + 1
