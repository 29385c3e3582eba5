from __future__ import annotations

import json
from dataclasses import replace

import pytest

from wulffcap.catalog import (
    CHECKS,
    SURFACES,
    CheckRequest,
    SurfaceRequest,
    default_suite,
    get_check,
    resolve_norm,
    run_check,
    surface_case,
)
from wulffcap.checks import TolerancePolicy
from wulffcap.errors import UsageError


def test_unknown_names_list_the_choices():
    with pytest.raises(UsageError, match="hsiung-minkowski"):
        get_check("minkowski")
    with pytest.raises(UsageError, match="ellipsoid"):
        resolve_norm("cube")
    with pytest.raises(UsageError, match="capillary-wulff"):
        surface_case(SurfaceRequest(surface="torus"))


def test_norm_options_reach_the_norm():
    norm = resolve_norm("harmonic", 3, step=2e-4, admissibility_nodes=128)
    assert norm.step == 2e-4
    assert norm.admissibility_nodes == 128
    request = SurfaceRequest(norm="isotropic", step=5e-5)
    assert request.build_norm().step == 5e-5


def test_norm_document_dimension_must_match(tmp_path):
    path = tmp_path / "plane.json"
    path.write_text(json.dumps({"family": "isotropic", "dim": 2}))
    assert resolve_norm(str(path), 2).dim_ambient == 2
    with pytest.raises(UsageError, match="expected 3"):
        resolve_norm(str(path), 3)


def test_surface_labels_carry_parameters():
    request = SurfaceRequest("perturbed-capillary", "ellipsoid", 3, 1.0, -0.3, 0.05, "cos")
    label = request.label()
    assert label.startswith("perturbed-capillary[ellipsoid")
    assert "eps=0.05" in label and "omega0=-0.3" in label


def test_every_surface_builds():
    for name in SURFACES:
        request = SurfaceRequest(surface=name, norm="isotropic")
        cap = surface_case(request).build(3)
        assert cap.surface.node_count > 0


def test_run_check_folds_over_k():
    request = CheckRequest(SurfaceRequest(), "const", None)
    reports = run_check("hsiung-minkowski", request, TolerancePolicy(level=3))
    assert [report.indices["k"] for report in reports] == [0, 1]
    assert all(report.passed for report in reports)


def test_run_check_validates_weight():
    request = replace(CheckRequest(), weight="cubic")
    with pytest.raises(UsageError, match="weight"):
        run_check("support-constancy", request, TolerancePolicy(level=3))


def test_default_suite_covers_every_check():
    entries = default_suite()
    assert {entry.check_id for entry in entries} == set(CHECKS)
    assert entries[0].check_id == "norm-duality"
