from __future__ import annotations

import math

import numpy as np
import pytest

from wulffcap.errors import ConstructionError, DomainError
from wulffcap.norms import isotropic
from wulffcap.surfaces import (
    curvature_field,
    elementary_symmetric,
    ellipsoid_surface,
    fd_step,
    newton_operators,
    radial_graph,
    sphere,
    surface_gradient,
    symmetric_functions,
)


def test_elementary_symmetric_functions():
    assert elementary_symmetric([1.0, 2.0, 3.0]) == pytest.approx([1.0, 6.0, 11.0, 6.0])
    _, mean = symmetric_functions([1.0, 2.0, 3.0])
    assert mean == pytest.approx([1.0, 2.0, 11.0 / 3.0, 6.0])


def test_newton_operators_satisfy_cayley_hamilton():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3))
    matrix = a + a.T
    sigma = elementary_symmetric(np.linalg.eigvalsh(matrix))
    operators = newton_operators(matrix, sigma)
    assert np.allclose(operators[0], np.eye(3))
    assert np.abs(operators[3]).max() < 1e-10
    # tr P_k = (n - k) sigma_k
    for k in range(3):
        assert np.trace(operators[k]) == pytest.approx((3 - k) * sigma[k])


def test_sphere_area_and_curvature():
    surface = sphere(3, 2.0, 4)
    assert surface.closed
    assert surface.total_area == pytest.approx(16.0 * math.pi, rel=1e-10)
    curvature = curvature_field(surface.nodes, isotropic(3))
    assert curvature.kappa == pytest.approx(np.full_like(curvature.kappa, 0.5), abs=1e-10)
    assert curvature.trace_residual < 1e-12


def test_circle_length():
    surface = sphere(2, 1.5, 4)
    assert surface.total_area == pytest.approx(3.0 * math.pi, rel=1e-12)


def test_frame_invariants_hold_on_ellipsoid():
    surface = ellipsoid_surface([1.0, 1.0, 1.5], 3)
    residuals = surface.invariant_residuals()
    assert residuals["normal_length"] < 1e-10
    assert residuals["normal_tangency"] < 1e-10
    assert residuals["frame_orthonormality"] < 1e-10


def test_ellipsoid_needs_positive_axes():
    with pytest.raises(ConstructionError):
        ellipsoid_surface([1.0, -1.0, 1.0], 3)


def test_surface_gradient_of_height_on_sphere():
    surface = sphere(3, 1.0, 3)
    geom = surface.nodes

    def height(params: np.ndarray) -> np.ndarray:
        return surface.sample(params, check_quality=False).position[:, 2]

    gradient = surface_gradient(geom, height, fd_step(surface, 0.05))
    exact = np.array([0.0, 0.0, 1.0]) - geom.normal[:, 2:3] * geom.normal
    assert np.max(np.abs(gradient - exact)) < 1e-3


def test_curvature_field_rejects_dimension_mismatch():
    surface = radial_graph(3, 1.0, 0.1, 3)
    with pytest.raises(DomainError):
        curvature_field(surface.nodes, isotropic(2))
