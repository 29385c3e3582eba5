from __future__ import annotations

import math

import pytest

from wulffcap.capillary import capillary_wulff, perturbed_capillary, sphere_cap
from wulffcap.checks import SurfaceCase, TolerancePolicy
from wulffcap.norms import ellipsoid


@pytest.fixture(autouse=True)
def _isolated_dirs(tmp_path, monkeypatch):
    monkeypatch.setenv("WULFFCAP_CONFIG_DIR", str(tmp_path / "cfg"))
    monkeypatch.setenv("WULFFCAP_REPORT_DIR", str(tmp_path / "reports"))


@pytest.fixture
def policy() -> TolerancePolicy:
    return TolerancePolicy(level=3, levels=(3, 4, 5), seed=7)


@pytest.fixture
def default_policy() -> TolerancePolicy:
    """The shipped tolerances at the default refinement level."""
    return TolerancePolicy(level=4, levels=(3, 4, 5), seed=7)


@pytest.fixture(scope="session")
def ellipsoid_norm():
    return ellipsoid([1.0, 1.0, 4.0])


@pytest.fixture(scope="session")
def wulff_case(ellipsoid_norm) -> SurfaceCase:
    return SurfaceCase("wulff", lambda level: capillary_wulff(ellipsoid_norm, 1.0, -0.3, level))


@pytest.fixture(scope="session")
def perturbed_case(wulff_case) -> SurfaceCase:
    return SurfaceCase("perturbed", lambda level: perturbed_capillary(wulff_case.build(level), 0.05, "cos"))


@pytest.fixture(scope="session")
def hemisphere_case() -> SurfaceCase:
    return SurfaceCase("hemisphere", lambda level: sphere_cap(3, math.pi / 2, 1.0, level))
