from __future__ import annotations

import math

import pytest

from wulffcap.checks import (
    RelationSpec,
    as_case,
    check_algebra,
    check_boundary_lemmas,
    check_cap_area,
    check_corollary,
    check_curvature_invariants,
    check_divergence_identity,
    check_heintze_karcher,
    check_hsiung_minkowski,
    check_norm,
    check_rigidity_relations,
    check_solver_convergence,
    check_support_constancy,
)
from wulffcap.errors import DomainError
from wulffcap.norms import ellipsoid, harmonic, isotropic
from wulffcap.weights import WEIGHTS


@pytest.mark.parametrize("k", [0, 1])
def test_minkowski_formula_on_wulff_shape(wulff_case, policy, k):
    report = check_hsiung_minkowski(wulff_case, WEIGHTS["const"], k, policy=policy)
    assert report.passed, report.details
    assert report.residual <= 1e-6
    assert report.indices == {"k": k}


def test_weighted_minkowski_ladder_on_perturbation(perturbed_case, policy):
    report = check_hsiung_minkowski(perturbed_case, WEIGHTS["u2"], 1, policy=policy, ladder=True)
    assert [level.level for level in report.ladder] == [3, 4, 5]
    assert report.fit is not None
    assert report.passed, report.details


def test_index_out_of_range(wulff_case, policy):
    with pytest.raises(DomainError):
        check_hsiung_minkowski(wulff_case, WEIGHTS["const"], 2, policy=policy)


@pytest.mark.parametrize("weight, expectation", [("u", "<= 0 (strict)"), ("exp_neg", ">= 0 (strict)")])
def test_monotone_weights_fix_the_sign(perturbed_case, policy, weight, expectation):
    report = check_corollary(perturbed_case, WEIGHTS[weight], 0, policy=policy)
    assert report.details["expectation"] == expectation
    assert report.passed, report.details


def test_corollary_is_an_equality_on_wulff_shapes(wulff_case, policy):
    report = check_corollary(wulff_case, WEIGHTS["u2"], 1, policy=policy)
    assert report.details["expectation"] == "equality"
    assert report.passed


def test_boundary_lemmas(wulff_case, perturbed_case, policy):
    for case in (wulff_case, perturbed_case):
        report = check_boundary_lemmas(case, policy=policy)
        assert report.passed, report.details
        assert report.residual <= 1e-8
        assert report.details["min_conormal_vertical"] > 0.0


def test_boundary_lemmas_need_a_boundary(policy):
    from wulffcap.capillary import closed_capillary
    from wulffcap.norms import isotropic
    from wulffcap.surfaces import sphere

    closed = closed_capillary(sphere(3, 1.0, 3), isotropic(3))
    with pytest.raises(DomainError):
        check_boundary_lemmas(closed, policy=policy)


def test_divergence_identity_converges(perturbed_case, policy):
    report = check_divergence_identity(perturbed_case, 0, policy=policy)
    assert report.passed, report.details
    assert report.fit is not None and report.fit.meets(0.9)


def test_heintze_karcher_on_hemisphere(hemisphere_case, policy):
    report = check_heintze_karcher(hemisphere_case, policy=policy)
    assert report.passed
    assert report.lhs == pytest.approx(2.0 * math.pi, rel=1e-8)
    assert report.rhs == pytest.approx(2.0 * math.pi, rel=1e-8)
    assert report.details["enclosed_volume"] == pytest.approx(2.0 * math.pi / 3.0, rel=1e-8)
    assert report.details["volume_mismatch"] < 1e-8


def test_heintze_karcher_is_strict_off_wulff(perturbed_case, policy):
    report = check_heintze_karcher(perturbed_case, policy=policy)
    assert report.passed
    assert report.details["relative_gap"] > 0.0


def test_soliton_relation_holds_only_on_wulff(wulff_case, perturbed_case, policy):
    holds = check_rigidity_relations(wulff_case, RelationSpec("soliton"), policy=policy)
    assert holds.passed and holds.details["expectation"] == "holds"
    witness = check_rigidity_relations(perturbed_case, RelationSpec("soliton"), policy=policy)
    assert witness.passed and witness.details["expectation"] == "violated"
    assert witness.details["violating_nodes"] > 0


@pytest.mark.parametrize("kind", ["linear-combination", "linear-combination-constant", "power-bounds", "ratio-bounds", "mixed-products"])
def test_relations_hold_on_wulff_shape(wulff_case, policy, kind):
    assert check_rigidity_relations(wulff_case, RelationSpec(kind), policy=policy).passed


def test_relation_tags_are_validated():
    with pytest.raises(DomainError, match="must be"):
        RelationSpec("power-bounds", tags={"c": "increasing"}).validate(2)
    with pytest.raises(DomainError, match="no coefficient"):
        RelationSpec("soliton", tags={"c": "constant"}).validate(2)
    with pytest.raises(DomainError):
        RelationSpec("ratio-bounds", index=1).validate(2)
    assert RelationSpec("soliton").validate(2) == 2


def test_support_constancy(wulff_case, perturbed_case, policy):
    assert check_support_constancy(wulff_case, policy=policy).passed
    report = check_support_constancy(perturbed_case, policy=policy)
    assert report.passed
    assert report.details["meets_witness"]


def test_curvature_invariants(wulff_case, policy):
    report = check_curvature_invariants(wulff_case, policy=policy)
    assert report.passed, report.details
    assert report.details["wulff_curvature"] < 1e-9


def test_cap_area_ladder(hemisphere_case, policy):
    report = check_cap_area(hemisphere_case, math.pi / 2, policy=policy)
    assert report.passed
    assert report.rhs == pytest.approx(2.0 * math.pi)


def test_norm_duality_report(policy):
    report = check_norm(ellipsoid([1.0, 1.0, 4.0]), "ellipsoid", policy=policy)
    assert report.passed, report.details
    assert report.fit is not None and report.fit.meets(1.8)


def test_algebra_reports():
    report = check_algebra("newton-maclaurin", 200)
    assert report.passed and report.residual == 0.0
    with pytest.raises(DomainError):
        check_algebra("cauchy", 10)


def test_solver_convergence_report():
    report = check_solver_convergence(math.pi / 3, 3.0)
    assert report.passed
    assert report.fit.order >= 1.8


def test_fixed_surface_cannot_be_refined(wulff_case, policy):
    case = as_case(wulff_case.build(3))
    assert case.build(3) is wulff_case.build(3)
    with pytest.raises(DomainError, match="SurfaceCase"):
        case.build(4)


def test_report_payload_is_plain(wulff_case, policy):
    report = check_support_constancy(wulff_case, policy=policy)
    payload = report.to_payload()
    assert payload["check"] == "support-constancy"
    assert payload["verdict"] == "pass"
    assert isinstance(payload["details"]["mean"], float)


@pytest.mark.parametrize("k", [0, 1])
def test_closed_harmonic_ellipsoid_at_default_level(default_policy, k):
    from wulffcap.catalog import CLOSED_ELLIPSOID, surface_case

    report = check_hsiung_minkowski(surface_case(CLOSED_ELLIPSOID), WEIGHTS["const"], k, policy=default_policy)
    assert report.passed, report.details
    assert report.residual <= 1e-6


@pytest.mark.parametrize("norm", [isotropic(3), isotropic(2), harmonic(3, 0.1)], ids=["sphere", "circle", "harmonic"])
def test_norm_duality_at_default_level(norm, default_policy):
    report = check_norm(norm, norm.family, policy=default_policy)
    assert report.passed, report.details
    assert report.fit is not None and report.fit.meets(1.8)


def test_isotropic_derivatives_are_exact_up_to_roundoff(default_policy):
    report = check_norm(isotropic(3), "isotropic", policy=default_policy)
    assert report.fit.exact
    assert max(report.details["numeric_derivative_errors"]) < 1e-9
