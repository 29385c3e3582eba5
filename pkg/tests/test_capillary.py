from __future__ import annotations

import math

import numpy as np
import pytest

from wulffcap.capillary import (
    admissible_interval,
    boundary_condition_residual,
    capillary_context,
    capillary_support,
    capillary_wulff,
    closed_capillary,
    e_f_vector,
    perturbed_capillary,
    positivity_sweep,
    sphere_cap,
)
from wulffcap.errors import DomainError
from wulffcap.norms import isotropic
from wulffcap.surfaces import sphere


def test_admissible_interval(ellipsoid_norm):
    assert admissible_interval(isotropic(3)) == pytest.approx((-1.0, 1.0))
    # F(E) = F(-E) = 2 for M = diag(1, 1, 4)
    assert admissible_interval(ellipsoid_norm) == pytest.approx((-2.0, 2.0))


@pytest.mark.parametrize("omega0", [-1.0, 1.0, 1.5])
def test_wetting_parameter_outside_interval(omega0):
    with pytest.raises(DomainError):
        capillary_context(isotropic(3), omega0)


def test_positivity_sweep(ellipsoid_norm):
    assert positivity_sweep(ellipsoid_norm, -0.3, 2000) > 0.0


def test_wulff_shape_has_constant_support(wulff_case):
    cap = wulff_case.build(3)
    stats = capillary_support(cap)
    assert stats.relative_spread < 1e-10
    assert stats.mean == pytest.approx(1.0, abs=1e-10)
    assert cap.curvature.kappa == pytest.approx(np.ones_like(cap.curvature.kappa), abs=1e-8)


def test_wulff_shape_meets_plane_at_contact_angle(wulff_case):
    cap = wulff_case.build(3)
    assert boundary_condition_residual(cap) < 1e-10
    heights = cap.surface.boundary.geometry.position[:, -1]
    assert np.max(np.abs(heights)) < 1e-10
    assert np.min(cap.surface.nodes.position[:, -1]) > 0.0


def test_round_cap_area():
    theta = math.pi / 3
    cap = sphere_cap(3, theta, 2.0, 4)
    assert cap.surface.total_area == pytest.approx(8.0 * math.pi * (1.0 - math.cos(theta)), rel=1e-10)


def test_perturbation_keeps_boundary_and_breaks_constancy(wulff_case):
    base = wulff_case.build(3)
    assert perturbed_capillary(base, 0.0) is base
    bumped = perturbed_capillary(base, 0.05)
    assert not bumped.is_wulff
    assert boundary_condition_residual(bumped) < 1e-8
    assert capillary_support(bumped).relative_spread > 1e-3


def test_closed_surface_support_is_pairing():
    cap = closed_capillary(sphere(3, 1.5, 3), isotropic(3), radius=1.5, wulff=True)
    assert cap.surface.boundary is None
    assert cap.fields.support == pytest.approx(np.full(cap.surface.node_count, 1.5))
    assert boundary_condition_residual(cap) == 0.0


def test_closed_capillary_rejects_caps(wulff_case):
    with pytest.raises(DomainError):
        closed_capillary(wulff_case.build(3).surface, isotropic(3))


@pytest.mark.parametrize("omega0", [-0.3, 0.0, 0.3])
def test_e_f_has_unit_vertical_component(ellipsoid_norm, omega0):
    e_f = e_f_vector(ellipsoid_norm, omega0)
    assert e_f[-1] == pytest.approx(1.0)
