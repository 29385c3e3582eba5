from __future__ import annotations

import json
import math

import numpy as np
import pytest

from wulffcap.errors import AdmissibilityError, DomainError
from wulffcap.norms import (
    WulffShapeSpec,
    a_f_matrix,
    cahn_hoffman,
    cauchy_schwarz_sweep,
    check_homogeneity,
    check_wulff_membership,
    dual_norm,
    ellipsoid,
    harmonic,
    isotropic,
    load_norm_file,
    random_unit_vectors,
    sphere_nodes,
    wulff_points,
)


def test_isotropic_is_euclidean():
    norm = isotropic(3)
    x = np.array([[3.0, 4.0, 0.0], [0.0, 0.0, -2.0]])
    assert norm.value(x) == pytest.approx([5.0, 2.0])
    assert dual_norm(norm, [0.0, 3.0, 4.0]) == pytest.approx(5.0)


def test_ellipsoid_dual_has_closed_form(ellipsoid_norm):
    # M = diag(1, 1, 4): F0(xi) = sqrt(xi^T M^-1 xi)
    assert dual_norm(ellipsoid_norm, [0.0, 0.0, 2.0]) == pytest.approx(1.0)
    assert dual_norm(ellipsoid_norm, [1.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert dual_norm(ellipsoid_norm, [0.0, 0.0, 0.0]) == 0.0


@pytest.mark.parametrize("norm", [harmonic(3, 0.1), harmonic(3, 0.08, "tesseral"), harmonic(2, 0.1)])
def test_cahn_hoffman_lands_on_unit_wulff_shape(norm):
    rng = np.random.default_rng(3)
    samples = random_unit_vectors(norm.dim_ambient, 12, rng)
    for point in cahn_hoffman(norm, samples):
        assert dual_norm(norm, point) == pytest.approx(1.0, abs=1e-8)


def test_cauchy_schwarz_and_homogeneity():
    norm = harmonic(3, 0.1)
    assert cauchy_schwarz_sweep(norm, samples=40, seed=1) <= 1e-10
    assert check_homogeneity(norm, seed=1) <= 1e-10


def test_numeric_derivatives_track_analytic(ellipsoid_norm):
    numeric = ellipsoid([1.0, 1.0, 4.0], derivative_mode="numeric")
    x = sphere_nodes(3, 50)
    assert np.max(np.abs(numeric.a_f(x) - ellipsoid_norm.a_f(x))) < 1e-6
    assert np.max(np.abs(numeric.gradient(x) - ellipsoid_norm.gradient(x))) < 1e-7


def test_a_f_is_positive_definite(ellipsoid_norm):
    matrices = a_f_matrix(ellipsoid_norm, sphere_nodes(3, 20))
    assert np.all(np.linalg.eigvalsh(matrices) > 0.0)


def test_cahn_hoffman_rejects_non_unit_input(ellipsoid_norm):
    with pytest.raises(DomainError):
        cahn_hoffman(ellipsoid_norm, [[1.0, 1.0, 0.0]])


def test_inadmissible_norms_fail_hard():
    with pytest.raises(AdmissibilityError):
        ellipsoid([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])
    with pytest.raises(AdmissibilityError):
        harmonic(3, 2.0)


def test_wulff_points_sit_on_the_shape(ellipsoid_norm):
    spec = WulffShapeSpec(ellipsoid_norm, 1.5, np.array([0.0, 1.0, 0.0]))
    points = wulff_points(spec, 40)
    assert check_wulff_membership(spec, points) < 1e-10
    assert check_wulff_membership(spec, points * 1.1) > 1e-3


def test_wulff_shape_needs_positive_radius(ellipsoid_norm):
    with pytest.raises(DomainError):
        WulffShapeSpec(ellipsoid_norm, 0.0)


def test_norm_document(tmp_path):
    path = tmp_path / "norm.json"
    path.write_text(json.dumps({"family": "ellipsoid", "M": [[1, 0, 0], [0, 1, 0], [0, 0, 4]]}))
    norm = load_norm_file(path, admissibility_nodes=64)
    assert norm.family == "ellipsoid"
    assert norm.admissibility_nodes == 64
    assert float(norm.value(np.array([0.0, 0.0, 1.0]))) == pytest.approx(2.0)


def test_norm_document_with_unknown_family(tmp_path):
    path = tmp_path / "norm.json"
    path.write_text(json.dumps({"family": "cube"}))
    with pytest.raises(DomainError, match="unknown norm family"):
        load_norm_file(path)


def test_sphere_nodes_are_unit():
    nodes = sphere_nodes(3, 100)
    assert np.linalg.norm(nodes, axis=-1) == pytest.approx(np.ones(100))
    assert math.isclose(float(np.max(nodes[:, 2])), 1.0, abs_tol=0.05)
