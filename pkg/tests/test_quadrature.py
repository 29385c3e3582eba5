from __future__ import annotations

import math

import numpy as np
import pytest

from wulffcap.errors import DomainError, QuadratureError
from wulffcap.quadrature import (
    cap_mesh,
    closed_mesh,
    composite_gauss_legendre,
    convergence_fit,
    enclosed_volume,
    gauss_legendre,
    integrate,
    periodic_midpoint,
    weighted_sum,
)
from wulffcap.surfaces import sphere


def test_gauss_legendre_is_exact_for_low_degree():
    nodes, weights = gauss_legendre(4, 0.0, 2.0)
    # degree 7 = 2 * 4 - 1
    assert weighted_sum(weights, nodes**7) == pytest.approx(2.0**8 / 8.0)


def test_composite_rule_integrates_smooth_functions():
    nodes, weights = composite_gauss_legendre(16, a=0.0, b=math.pi)
    assert weighted_sum(weights, np.sin(nodes)) == pytest.approx(2.0, abs=1e-12)


def test_weighted_sum_reports_the_bad_node():
    weights = np.ones(5)
    values = np.array([1.0, 2.0, np.nan, 4.0, 5.0])
    with pytest.raises(QuadratureError) as excinfo:
        weighted_sum(weights, values)
    assert excinfo.value.node == 2


def test_mesh_sizes_double_with_level():
    coarse, fine = cap_mesh(3, 2), cap_mesh(4, 2)
    assert fine.node_count == 4 * coarse.node_count
    assert coarse.boundary_count == 16
    assert closed_mesh(3, 1).node_count == 8 * 4
    assert weighted_sum(coarse.weights, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("level, dim", [(0, 2), (9, 2), (3, 3)])
def test_mesh_rejects_bad_requests(level, dim):
    with pytest.raises(DomainError):
        cap_mesh(level, dim)


def test_convergence_fit_recovers_order():
    h = [2.0**-i for i in (3, 4, 5)]
    fit = convergence_fit([3.0 * s**2 for s in h], None, h)
    assert fit.order == pytest.approx(2.0)
    assert fit.meets(1.8)
    assert not fit.exact


def test_convergence_fit_flags_exact_ladders():
    fit = convergence_fit([1e-15, 2e-15, 1e-16], None, floor=1e-13)
    assert fit.exact
    assert fit.label == "exact"
    assert fit.meets(5.0)


def test_convergence_fit_needs_three_levels():
    with pytest.raises(DomainError):
        convergence_fit([1.0, 0.5], None)


def test_closed_mesh_refines_the_polar_direction():
    mesh = closed_mesh(3, 2)
    assert mesh.node_count == 16 * 16
    assert mesh.boundary_count == 0
    assert weighted_sum(mesh.weights, 1.0) == pytest.approx(1.0)
    assert closed_mesh(4, 2).node_count == 4 * mesh.node_count


def test_periodic_midpoint_is_spectral():
    nodes, weights = periodic_midpoint(16)
    assert weighted_sum(weights, np.cos(2.0 * np.pi * 5.0 * nodes) ** 2) == pytest.approx(0.5, abs=1e-14)
    assert weighted_sum(weights, np.exp(np.sin(2.0 * np.pi * nodes))) == pytest.approx(1.2660658777520082, abs=1e-12)


def test_enclosed_volume_of_a_sphere():
    surface = sphere(3, 1.5, 4)
    assert enclosed_volume(surface) == pytest.approx(4.5 * math.pi, rel=1e-10)
    # <X, nu> = r on a sphere centred at the origin
    assert integrate(surface, 1.5) == pytest.approx(3.0 * enclosed_volume(surface), rel=1e-10)


def test_enclosed_volume_matches_the_support_integral(perturbed_case):
    cap = perturbed_case.build(4)
    volume = enclosed_volume(cap.surface)
    assert volume > 0.0
    assert integrate(cap.surface, cap.fields.pairing) == pytest.approx((cap.dim + 1) * volume, rel=1e-4)
