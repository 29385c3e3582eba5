"""Capillary Wulff shapes, their perturbations and the capillary support function.

A capillary hypersurface lives in the upper half-space ``x_{n+1} >= 0`` and
meets the supporting plane along its boundary with
``<Phi(nu), -E> = omega0``.  With ``E^F`` normalised so that ``<E^F, E> = 1``,
the model is the translated Wulff shape ``r0 (W + omega0 E^F)`` cut by the
plane, and the capillary support function is

    u_bar = <X, nu> / (F(nu) + omega0 <nu, E^F>).

Closed surfaces are handled through the same types with ``omega0 = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .errors import AdmissibilityError, ConstructionError, CurvatureError, DomainError, InvariantViolationError
from .logging import get_logger
from .norms import MinkowskiNorm, isotropic, sphere_nodes
from .quadrature import weighted_sum
from .surfaces import (
    CapDomain,
    CurvatureField,
    GaussMapPatch,
    Hypersurface,
    NodeGeometry,
    PerturbedCapillaryPatch,
    build_surface,
    curvature_field,
)

LOG = get_logger(__name__)

TANGENCY_LIMIT = 1e-10
POSITIVITY_SAMPLES = 10_000


def _vertical(dim: int) -> np.ndarray:
    axis = np.zeros(dim)
    axis[-1] = 1.0
    return axis


def admissible_interval(norm: MinkowskiNorm) -> tuple[float, float]:
    """Open interval ``(-F(E), F(-E))`` of wetting parameters."""
    up = _vertical(norm.dim_ambient)
    values = norm.value(np.stack([up, -up]))
    return -float(values[0]), float(values[1])


def e_f_vector(norm: MinkowskiNorm, omega0: float) -> np.ndarray:
    """``E^F`` with ``<E^F, E> = 1``, taken on the side selected by the sign of ``omega0``."""
    up = _vertical(norm.dim_ambient)
    if omega0 < 0.0:
        return norm.gradient(up[None, :])[0] / float(norm.value(up))
    if omega0 > 0.0:
        return -norm.gradient(-up[None, :])[0] / float(norm.value(-up))
    return up


@dataclass(frozen=True, eq=False)
class CapillaryContext:
    norm: MinkowskiNorm
    omega0: float
    e_f: np.ndarray

    @property
    def dim_ambient(self) -> int:
        return self.norm.dim_ambient

    def denominator(self, normals: np.ndarray) -> np.ndarray:
        """``F(nu) + omega0 <nu, E^F>``."""
        return self.norm.value(normals) + self.omega0 * (normals @ self.e_f)

    def describe(self) -> dict[str, Any]:
        return {"omega0": self.omega0, "e_f": [float(v) for v in self.e_f]}


def capillary_context(norm: MinkowskiNorm, omega0: float) -> CapillaryContext:
    lower, upper = admissible_interval(norm)
    if not lower < omega0 < upper:
        raise DomainError(f"omega0 = {omega0} is outside the admissible interval ({lower:.6g}, {upper:.6g})")
    return CapillaryContext(norm, float(omega0), e_f_vector(norm, omega0))


def closed_context(norm: MinkowskiNorm) -> CapillaryContext:
    """Context for closed hypersurfaces: ``u_bar`` reduces to ``<X, nu>/F(nu)``."""
    return CapillaryContext(norm, 0.0, _vertical(norm.dim_ambient))


def positivity_sweep(
    norm: MinkowskiNorm, omega0: float, samples: int = POSITIVITY_SAMPLES, *, seed: int = 0
) -> float:
    """Smallest ``F(nu) + omega0 <nu, E^F>`` over quasi-uniform unit vectors; raises if not positive."""
    context = capillary_context(norm, omega0)
    normals = sphere_nodes(norm.dim_ambient, samples, seed=seed)
    smallest = float(np.min(context.denominator(normals)))
    if not smallest > 0.0:
        raise AdmissibilityError(f"capillary denominator is not positive (min {smallest:.3e})")
    return smallest


# ---------------------------------------------------------------------------
# Per-node capillary fields
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CapillaryFields:
    norm_value: np.ndarray
    cahn_hoffman: np.ndarray
    pairing: np.ndarray  # <X, nu>
    denominator: np.ndarray
    support: np.ndarray
    xi: np.ndarray
    xi_frame: np.ndarray


def capillary_fields(geometry: NodeGeometry, context: CapillaryContext) -> CapillaryFields:
    nu = geometry.normal
    position = geometry.position
    value = context.norm.value(nu)
    phi = context.norm.gradient(nu)
    pairing = np.einsum("mi,mi->m", position, nu)
    denominator = value + context.omega0 * (nu @ context.e_f)
    if np.min(denominator, initial=1.0) <= 0.0:
        raise AdmissibilityError("capillary denominator vanished on the surface")
    tangent_x = geometry.tangential(position)
    tangent_e = context.e_f[None, :] - (nu @ context.e_f)[:, None] * nu
    omega = context.omega0
    xi = (
        value[:, None] * position
        - pairing[:, None] * phi
        + omega * (nu @ context.e_f)[:, None] * tangent_x
        - omega * pairing[:, None] * tangent_e
    )
    normal_part = np.abs(np.einsum("mi,mi->m", xi, nu))
    scale = np.maximum(1.0, np.linalg.norm(position, axis=-1) * value)
    worst = float(np.max(normal_part / scale, initial=0.0))
    if worst > TANGENCY_LIMIT:
        raise InvariantViolationError(f"xi is not tangent to the surface (normal part {worst:.3e})")
    return CapillaryFields(
        value, phi, pairing, denominator, pairing / denominator, xi, geometry.to_frame(xi)
    )


def xi_field(geometry: NodeGeometry, context: CapillaryContext) -> np.ndarray:
    """Tangent field ``xi`` whose divergence drives the Minkowski-type formulas."""
    return capillary_fields(geometry, context).xi


def support_gradient(geometry: NodeGeometry, fields: CapillaryFields) -> np.ndarray:
    """``grad u_bar = D^-2 dnu(xi)`` as an ambient tangent vector."""
    components = np.einsum("mab,mb->ma", geometry.shape, fields.xi_frame) / fields.denominator[:, None] ** 2
    return geometry.from_frame(components)


# ---------------------------------------------------------------------------
# Capillary surfaces
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SupportStats:
    values: np.ndarray
    minimum: float
    maximum: float
    mean: float
    stdev: float

    @property
    def relative_spread(self) -> float:
        return self.stdev / abs(self.mean) if self.mean else math.inf

    def to_payload(self) -> dict[str, float]:
        return {
            "min": self.minimum,
            "max": self.maximum,
            "mean": self.mean,
            "stdev": self.stdev,
            "relative_spread": self.relative_spread,
        }


@dataclass(frozen=True, eq=False)
class CapillarySurface:
    """A hypersurface together with the norm and wetting data it is measured against."""

    surface: Hypersurface
    context: CapillaryContext
    radius: float
    epsilon: float = 0.0
    profile: str | None = None
    wulff: bool = False

    @property
    def norm(self) -> MinkowskiNorm:
        return self.context.norm

    @property
    def dim(self) -> int:
        return self.surface.dim

    @property
    def level(self) -> int:
        return self.surface.level

    @property
    def is_wulff(self) -> bool:
        return self.wulff

    @cached_property
    def curvature(self) -> CurvatureField:
        return curvature_field(self.surface.nodes, self.norm)

    @cached_property
    def fields(self) -> CapillaryFields:
        return capillary_fields(self.surface.nodes, self.context)

    @cached_property
    def boundary_curvature(self) -> CurvatureField | None:
        if self.surface.boundary is None:
            return None
        return curvature_field(self.surface.boundary.geometry, self.norm)

    @cached_property
    def boundary_fields(self) -> CapillaryFields | None:
        if self.surface.boundary is None:
            return None
        return capillary_fields(self.surface.boundary.geometry, self.context)

    def describe(self) -> dict[str, Any]:
        payload = {
            **self.surface.descriptor,
            "name": self.surface.name,
            "kind": self.surface.kind,
            "level": self.level,
            "nodes": self.surface.node_count,
            "r0": self.radius,
            **self.context.describe(),
        }
        if self.epsilon:
            payload.update(eps=self.epsilon, psi=self.profile)
        return payload


def capillary_wulff(norm: MinkowskiNorm, r0: float, omega0: float, level: int = 4) -> CapillarySurface:
    """The capillary Wulff shape ``r0 (W + omega0 E^F)`` intersected with the upper half-space."""
    if not r0 > 0:
        raise DomainError("capillary Wulff radius must be positive")
    if norm.dim_ambient not in (2, 3):
        raise DomainError("capillary surfaces are built for n + 1 in {2, 3}")
    context = capillary_context(norm, omega0)
    domain = CapDomain(norm, float(r0), context.omega0)
    patch = GaussMapPatch(norm, domain, float(r0), float(r0) * context.omega0 * context.e_f)
    descriptor = {"surface": "capillary-wulff", "norm": norm.describe()}
    surface = build_surface("capillary-wulff", patch, level, descriptor)
    return CapillarySurface(surface, context, float(r0), wulff=True)


def sphere_cap(dim_ambient: int = 3, theta: float = math.pi / 3, r0: float = 1.0, level: int = 4) -> CapillarySurface:
    """Round spherical cap meeting the plane at contact angle ``theta`` (``omega0 = -cos theta``)."""
    if not 0.0 < theta < math.pi:
        raise DomainError("contact angle must lie in (0, pi)")
    cap = capillary_wulff(isotropic(dim_ambient), r0, -math.cos(theta), level)
    cap.surface.descriptor.update(surface="sphere-cap", theta=theta)
    return cap


def perturbed_capillary(
    base: CapillarySurface, epsilon: float, profile: str = "cos", *, level: int | None = None
) -> CapillarySurface:
    """Capillary surface through the boundary of ``base`` with a bump of size ``epsilon``.

    ``epsilon = 0`` returns ``base`` itself.
    """
    if epsilon == 0.0 and level in (None, base.level):
        return base
    domain = base.surface.patch.domain
    if not isinstance(domain, CapDomain):
        raise DomainError("only capillary Wulff shapes can be perturbed")
    context = base.context
    patch = PerturbedCapillaryPatch(
        base.norm, domain, base.radius, context.omega0, context.e_f, float(epsilon), profile
    )
    descriptor = {**base.surface.descriptor, "surface": "perturbed-capillary", "eps": epsilon, "psi": profile}
    surface = build_surface("perturbed-capillary", patch, level or base.level, descriptor)
    perturbed = CapillarySurface(surface, context, base.radius, float(epsilon), profile, wulff=epsilon == 0.0)
    smallest = float(np.min(perturbed.curvature.kappa))
    if not smallest > 0.0:
        raise CurvatureError(
            f"perturbation eps={epsilon} leaves the surface non-convex (min kappa^F = {smallest:.3e})"
        )
    residual = boundary_condition_residual(perturbed)
    if residual > 1e-8:
        raise ConstructionError(f"perturbation moved the contact angle (residual {residual:.3e})")
    LOG.debug("perturbed capillary eps=%g psi=%s: min kappa^F %.4f", epsilon, profile, smallest)
    return perturbed


def closed_capillary(
    surface: Hypersurface, norm: MinkowskiNorm, *, radius: float = 1.0, wulff: bool = False
) -> CapillarySurface:
    if surface.boundary is not None:
        raise DomainError("closed_capillary needs a closed hypersurface")
    if surface.ambient_dim != norm.dim_ambient:
        raise DomainError("surface and norm dimensions disagree")
    return CapillarySurface(surface, closed_context(norm), radius, wulff=wulff)


def boundary_condition_residual(cap: CapillarySurface) -> float:
    """Max of ``| <Phi(nu), -E> - omega0 |`` over boundary nodes (0 on closed surfaces)."""
    fields = cap.boundary_fields
    if fields is None:
        return 0.0
    up = _vertical(cap.context.dim_ambient)
    return float(np.max(np.abs(fields.cahn_hoffman @ (-up) - cap.context.omega0)))


def capillary_support(cap: CapillarySurface) -> SupportStats:
    """Distribution of ``u_bar`` over quadrature nodes, area-weighted."""
    values = cap.fields.support
    weights = cap.surface.weights
    area = weighted_sum(weights, np.ones_like(values))
    mean = weighted_sum(weights, values) / area
    variance = max(0.0, weighted_sum(weights, (values - mean) ** 2) / area)
    return SupportStats(values, float(np.min(values)), float(np.max(values)), mean, math.sqrt(variance))
