from __future__ import annotations

import math

import numpy as np
import pytest

from wulffcap.errors import DomainError
from wulffcap.solver import (
    CapillaryBVP,
    initial_guess,
    manufactured_profile,
    manufactured_rhs,
    scaling_covariance,
    self_convergence,
    solve,
    uniqueness_experiment,
)

THETA = math.pi / 3


@pytest.mark.parametrize("name", ["cap", "bumped", "tilted"])
def test_manufactured_profiles_meet_the_robin_condition(name):
    profile = manufactured_profile(name, THETA)
    h = 1e-6
    for end, sign in ((THETA, 1.0), (-THETA, -1.0)):
        t = np.array([end - h, end + h])
        derivative = float(np.diff(profile.u(t))[0] / (2.0 * h))
        value = float(profile.u(np.array([end]))[0])
        assert derivative == pytest.approx(sign * value / math.tan(THETA), abs=1e-6)


def test_manufactured_right_hand_side_is_positive():
    phi = manufactured_rhs(manufactured_profile("bumped", THETA), 3.0, grid=64)
    assert phi.shape == (65,)
    assert np.all(phi > 0.0)


def test_solver_recovers_manufactured_profile():
    profile = manufactured_profile("bumped", THETA)
    bvp = CapillaryBVP.manufactured(profile, 3.0, 256)
    result = solve(bvp)
    assert result.residual <= bvp.tolerance * max(1.0, float(np.max(bvp.phi)))
    assert result.history[-1] == result.residual
    assert result.convexity > 0.0
    assert result.max_error(profile.u) < 1e-3


def test_second_order_convergence():
    study = self_convergence(manufactured_profile("bumped", THETA), 3.0, (64, 128, 256))
    assert study.fit.order >= 1.8
    assert study.self_order is not None and study.self_order >= 1.8


@pytest.mark.parametrize("p", [2.0, 1.0])
def test_gauged_exponents_converge(p):
    study = self_convergence(manufactured_profile("bumped", THETA), p, (64, 128, 256))
    assert study.fit.meets(1.8)


def test_unique_solution_for_supercritical_exponent():
    bvp = CapillaryBVP.manufactured(manufactured_profile("bumped", THETA), 3.0, 64)
    report = uniqueness_experiment(bvp, 6, seed=5)
    assert report.verdict == "unique"
    assert report.converged >= 2
    assert report.diameter <= 1e-8


def test_scale_invariant_exponent_gives_a_family():
    bvp = CapillaryBVP.manufactured(manufactured_profile("bumped", THETA), 2.0, 64)
    report = uniqueness_experiment(bvp, 6, seed=5)
    assert report.verdict == "scaling-family"
    assert report.passed


def test_scaling_covariance():
    bvp = CapillaryBVP.manufactured(manufactured_profile("bumped", THETA), 3.0, 64)
    assert scaling_covariance(bvp, 2.0) <= 1e-8


def test_constant_data_at_p_one_gives_an_arc():
    bvp = CapillaryBVP.from_function(THETA, 1.0, 1.0, 64)
    assert bvp.gauge == "translation"
    result = solve(bvp)
    # (u'' + u) = 1 is solved by the circular arc of radius 1
    radius = np.diff(result.u, 2) / bvp.spacing**2 + result.u[1:-1]
    assert radius == pytest.approx(np.ones_like(radius), abs=1e-3)


def test_initial_guess_is_positive():
    bvp = CapillaryBVP.from_function(THETA, 3.0, 2.0, 32)
    assert np.all(initial_guess(bvp) > 0.0)


@pytest.mark.parametrize(
    "theta, p, grid",
    [(0.0, 3.0, 64), (math.pi, 3.0, 64), (THETA, 0.5, 64), (THETA, 3.0, 63), (THETA, 3.0, 4)],
)
def test_bvp_validation(theta, p, grid):
    with pytest.raises(DomainError):
        CapillaryBVP.from_function(theta, p, 1.0, grid)


def test_bvp_rejects_nonpositive_data():
    with pytest.raises(DomainError, match="positive"):
        CapillaryBVP.from_function(THETA, 3.0, lambda t: np.cos(4.0 * t), 64)
