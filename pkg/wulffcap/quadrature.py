"""Gauss-Legendre meshes on parameter domains and deterministic surface sums.

Parameter domains are unit boxes: ``s in [0, 1]`` for n = 1 and
``(s, v) in [0, 1]^2`` for n = 2, where ``s`` runs along meridians (``s = 1`` is
the boundary of a cap) and ``v`` is the azimuth divided by ``2 pi``.  Surfaces
turn the parameter weights into area weights by multiplying with the area
element of their own parametrization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, QuadratureError

PANEL_ORDER = 4
DEFAULT_FLOOR = 1e-13


def gauss_legendre(count: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(count)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def composite_gauss_legendre(
    panels: int, order: int = PANEL_ORDER, a: float = 0.0, b: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    ref_nodes, ref_weights = gauss_legendre(order)
    width = (b - a) / panels
    starts = a + width * np.arange(panels)
    nodes = (starts[:, None] + width * ref_nodes[None, :]).reshape(-1)
    weights = np.tile(width * ref_weights, panels)
    return nodes, weights


@dataclass(frozen=True, eq=False)
class QuadratureMesh:
    """Nodes and weights on the unit parameter box at one refinement level."""

    level: int
    dim: int
    closed: bool
    nodes: np.ndarray
    weights: np.ndarray
    boundary_nodes: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    boundary_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # +1 where the outward co-normal points towards increasing s, -1 otherwise.
    boundary_sides: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def node_count(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def boundary_count(self) -> int:
        return int(self.boundary_nodes.shape[0])

    @property
    def spacing(self) -> float:
        return 2.0**-self.level


def _tensor_mesh(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    s, ws = gauss_legendre(2**level)
    v, wv = gauss_legendre(2 ** (level + 1))
    ss, vv = np.meshgrid(s, v, indexing="ij")
    nodes = np.stack([ss.reshape(-1), vv.reshape(-1)], axis=-1)
    weights = (ws[:, None] * wv[None, :]).reshape(-1)
    return nodes, weights, v, wv


def cap_mesh(level: int, dim: int) -> QuadratureMesh:
    """Mesh for a patch with boundary (spherical-cap type parameter domain)."""
    _check_level(level)
    if dim == 2:
        nodes, weights, v, wv = _tensor_mesh(level)
        boundary = np.stack([np.ones_like(v), v], axis=-1)
        return QuadratureMesh(level, 2, False, nodes, weights, boundary, wv, np.ones_like(v))
    if dim == 1:
        s, ws = composite_gauss_legendre(2**level)
        boundary = np.array([[0.0], [1.0]])
        return QuadratureMesh(
            level, 1, False, s[:, None], ws, boundary, np.ones(2), np.array([-1.0, 1.0])
        )
    raise DomainError(f"surface quadrature is only available for n in {{1, 2}}, not {dim}")


def periodic_midpoint(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint rule on the unit period; spectrally accurate for smooth periodic integrands."""
    return (np.arange(count) + 0.5) / count, np.full(count, 1.0 / count)


def closed_mesh(level: int, dim: int) -> QuadratureMesh:
    """Mesh for a closed patch (whole sphere or circle of parameters).

    For n = 2 both poles lie inside the polar direction, so it gets twice the
    Gauss nodes of a cap at the same level; the azimuth uses the periodic
    midpoint rule.
    """
    _check_level(level)
    if dim == 2:
        s, ws = gauss_legendre(2 ** (level + 1))
        v, wv = periodic_midpoint(2 ** (level + 1))
        ss, vv = np.meshgrid(s, v, indexing="ij")
        nodes = np.stack([ss.reshape(-1), vv.reshape(-1)], axis=-1)
        weights = (ws[:, None] * wv[None, :]).reshape(-1)
        return QuadratureMesh(level, 2, True, nodes, weights, np.zeros((0, 2)))
    if dim == 1:
        s, ws = composite_gauss_legendre(2**level)
        return QuadratureMesh(level, 1, True, s[:, None], ws, np.zeros((0, 1)))
    raise DomainError(f"surface quadrature is only available for n in {{1, 2}}, not {dim}")


def _check_level(level: int) -> None:
    if not 1 <= level <= 8:
        raise DomainError(f"refinement level must lie in 1..8, got {level}")


def weighted_sum(weights: np.ndarray, values: Any) -> float:
    """Compensated ``sum w_i f_i`` in node order; NaN/inf at any node raises."""
    vals = np.broadcast_to(np.asarray(values, dtype=float), np.shape(weights))
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        node = int(bad[0])
        raise QuadratureError(f"integrand is not finite at node {node}", node=node)
    return math.fsum((np.asarray(weights) * vals).tolist())


def integrate(surface: Any, f: Any) -> float:
    """``int_Sigma f dmu_g`` with the surface's area weights."""
    return weighted_sum(surface.weights, f)


def boundary_integrate(surface: Any, f: Any) -> float:
    """``int_{dSigma} f dmu_{dSigma}``; zero on closed surfaces."""
    boundary = surface.boundary
    if boundary is None or boundary.weights.size == 0:
        return 0.0
    return weighted_sum(boundary.weights, f)


def enclosed_volume(surface: Any) -> float:
    """Volume enclosed by a closed surface, or by a cap and its wetted region of ``x_{n+1} = 0``.

    Flux of the field ``x_{n+1} E_{n+1}``, whose divergence is 1; it vanishes on
    the plane, so only the hypersurface contributes.
    """
    geometry = surface.nodes
    return weighted_sum(surface.weights, geometry.position[:, -1] * geometry.normal[:, -1])


@dataclass(frozen=True)
class ConvergenceFit:
    order: float | None
    exact: bool
    errors: tuple[float, ...]
    spacings: tuple[float, ...]

    @property
    def label(self) -> str:
        return "exact" if self.exact else f"{self.order:.2f}"

    def meets(self, minimum: float) -> bool:
        return self.exact or (self.order is not None and self.order >= minimum)

    def to_payload(self) -> dict[str, Any]:
        return {"order": self.order, "exact": self.exact, "errors": list(self.errors)}


def convergence_fit(
    values: Sequence[float],
    reference: float | None = 0.0,
    spacings: Sequence[float] | None = None,
    *,
    floor: float = DEFAULT_FLOOR,
) -> ConvergenceFit:
    """Least-squares slope of ``log|error|`` against ``log h``.

    ``reference=None`` means ``values`` already are errors.  Errors under
    ``floor`` are clamped to it; when every level is under the floor the fit
    reports ``exact`` instead of a slope.
    """
    if len(values) < 3:
        raise DomainError("a convergence fit needs at least three levels")
    errors = np.abs(np.asarray(values, dtype=float) - (0.0 if reference is None else reference))
    if spacings is None:
        spacings = [2.0**-i for i in range(len(errors))]
    h = np.asarray(spacings, dtype=float)
    if h.shape != errors.shape or np.any(h <= 0):
        raise DomainError("spacings must be positive and match the number of levels")
    if not np.all(np.isfinite(errors)):
        raise QuadratureError("ladder contains a non-finite error", node=int(np.flatnonzero(~np.isfinite(errors))[0]))
    error_tuple = tuple(float(e) for e in errors)
    if np.all(errors < floor):
        return ConvergenceFit(None, True, error_tuple, tuple(h.tolist()))
    clamped = np.maximum(errors, floor)
    slope = float(np.polyfit(np.log(h), np.log(clamped), 1)[0])
    return ConvergenceFit(slope, False, error_tuple, tuple(h.tolist()))
