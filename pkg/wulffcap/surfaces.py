"""Parametrized hypersurfaces, shape operators and anisotropic curvatures.

Every surface is a map from the unit parameter box (see :mod:`.quadrature`)
into ``R^{n+1}``.  Patches return positions, parameter partials, the outward
normal and its parameter partials at *arbitrary* parameter points, which is
what lets the identity checks difference any derived field along the
parametrization.

Frames come from a QR factorisation ``J = E R`` of the parameter Jacobian, so
``dnu`` in the frame is ``E^T (d nu) R^{-1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Protocol

import numpy as np
from scipy.special import comb

from .errors import (
    AdmissibilityError,
    ConsistencyError,
    ConstructionError,
    CurvatureError,
    DomainError,
    MeshQualityError,
)
from .logging import get_logger
from .norms import MinkowskiNorm, harmonic_mode_matrix, isotropic
from .quadrature import QuadratureMesh, cap_mesh, closed_mesh

LOG = get_logger(__name__)

ASYMMETRY_LIMIT = 1e-4
COMPLEX_RESIDUE_LIMIT = 1e-8
NEWTON_SYMMETRY_LIMIT = 1e-8
TRACE_LIMIT = 1e-9
NORMAL_FD_STEP = 1e-5
ROOT_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# Parameter domains: parameter box -> unit normals z and their partials
# ---------------------------------------------------------------------------
def _vertical(dim: int) -> np.ndarray:
    axis = np.zeros(dim)
    axis[-1] = 1.0
    return axis


def _meridian(theta: np.ndarray, w: np.ndarray, up: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``z = cos(theta) E + sin(theta) w`` and ``dz/dtheta``."""
    c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
    return c * up + s * w, -s * up + c * w


class ParameterDomain(Protocol):
    dim: int
    ambient_dim: int
    closed: bool

    def normals(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ...


@dataclass(frozen=True)
class SphereDomain:
    """Whole sphere: ``theta = pi s``, ``phi = 2 pi v`` (n = 2) or ``t = 2 pi s`` (n = 1)."""

    ambient_dim: int
    closed: bool = True

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def normals(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.ambient_dim == 2:
            t = 2.0 * np.pi * params[:, 0]
            z = np.stack([np.sin(t), np.cos(t)], axis=-1)
            dz = 2.0 * np.pi * np.stack([np.cos(t), -np.sin(t)], axis=-1)
            return z, dz[:, :, None]
        theta = np.pi * params[:, 0]
        phi = 2.0 * np.pi * params[:, 1]
        w = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
        w_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
        z, z_theta = _meridian(theta, w, _vertical(3))
        z_phi = np.sin(theta)[:, None] * w_phi
        return z, np.stack([np.pi * z_theta, 2.0 * np.pi * z_phi], axis=-1)


@dataclass(frozen=True, eq=False)
class CapDomain:
    """Normals of the capillary Wulff shape ``r Phi(z) + r omega0 E^F`` lying above the plane.

    The height ``b(z) = r (<Phi(z), E> + omega0)`` decreases strictly along
    every meridian from ``E`` to ``-E``; its zero is the boundary angle.
    """

    norm: MinkowskiNorm
    radius: float
    omega0: float
    closed: bool = False

    def __post_init__(self) -> None:
        up = _vertical(self.norm.dim_ambient)
        top = self.height(up[None, :])[0]
        bottom = self.height(-up[None, :])[0]
        if not (top > 0.0 > bottom):
            raise ConstructionError(
                f"capillary domain is empty or unbounded (height {top:.3e} at top, {bottom:.3e} at bottom)"
            )
        if self.ambient_dim == 2:
            right = self._boundary_angle(np.array([[1.0, 0.0]]))[0]
            left = self._boundary_angle(np.array([[-1.0, 0.0]]))[0]
            object.__setattr__(self, "arc", (-float(left), float(right)))
            if right < 1e-6 or left < 1e-6:
                raise ConstructionError("capillary domain collapsed to a point")

    @property
    def ambient_dim(self) -> int:
        return self.norm.dim_ambient

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def height(self, z: np.ndarray) -> np.ndarray:
        up = _vertical(self.ambient_dim)
        return self.radius * (self.norm.gradient(z) @ up + self.omega0)

    def height_gradient(self, z: np.ndarray) -> np.ndarray:
        up = _vertical(self.ambient_dim)
        return self.radius * (self.norm.hessian(z) @ up)

    @property
    def top_height(self) -> float:
        up = _vertical(self.ambient_dim)
        return float(self.height(up[None, :])[0])

    def _boundary_angle(self, w: np.ndarray) -> np.ndarray:
        """Zero of the height along each meridian through the horizontal unit vectors ``w``."""
        up = _vertical(self.ambient_dim)
        lo = np.zeros(len(w))
        hi = np.full(len(w), np.pi)
        while np.max(hi - lo) > ROOT_TOLERANCE:
            mid = 0.5 * (lo + hi)
            positive = self.height(_meridian(mid, w, up)[0]) > 0.0
            lo = np.where(positive, mid, lo)
            hi = np.where(positive, hi, mid)
        theta = 0.5 * (lo + hi)
        z, z_theta = _meridian(theta, w, up)
        slope = np.einsum("mi,mi->m", self.height_gradient(z), z_theta)
        polished = theta - self.height(z) / slope
        inside = (polished > lo - ROOT_TOLERANCE) & (polished < hi + ROOT_TOLERANCE)
        return np.where(inside, polished, theta)

    def boundary_angles(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``theta_b(phi)`` and ``theta_b'(phi)`` for n = 2."""
        unique_phi, inverse = np.unique(phi, return_inverse=True)
        w = np.stack([np.cos(unique_phi), np.sin(unique_phi), np.zeros_like(unique_phi)], axis=-1)
        w_phi = np.stack([-np.sin(unique_phi), np.cos(unique_phi), np.zeros_like(unique_phi)], axis=-1)
        theta = self._boundary_angle(w)
        z, z_theta = _meridian(theta, w, _vertical(3))
        grad = self.height_gradient(z)
        b_theta = np.einsum("mi,mi->m", grad, z_theta)
        b_phi = np.einsum("mi,mi->m", grad, np.sin(theta)[:, None] * w_phi)
        return theta[inverse], (-b_phi / b_theta)[inverse]

    def normals(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.ambient_dim == 2:
            left, right = self.arc
            t = left + params[:, 0] * (right - left)
            z = np.stack([np.sin(t), np.cos(t)], axis=-1)
            dz = (right - left) * np.stack([np.cos(t), -np.sin(t)], axis=-1)
            return z, dz[:, :, None]
        s = params[:, 0]
        phi = 2.0 * np.pi * params[:, 1]
        theta_b, theta_b_prime = self.boundary_angles(phi)
        theta = s * theta_b
        w = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
        w_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
        z, z_theta = _meridian(theta, w, _vertical(3))
        z_phi = np.sin(theta)[:, None] * w_phi
        dz_ds = theta_b[:, None] * z_theta
        dz_dv = 2.0 * np.pi * ((s * theta_b_prime)[:, None] * z_theta + z_phi)
        return z, np.stack([dz_ds, dz_dv], axis=-1)


# ---------------------------------------------------------------------------
# Patches
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PatchSample:
    params: np.ndarray
    position: np.ndarray  # (m, d)
    jacobian: np.ndarray  # (m, d, n)
    normal: np.ndarray  # (m, d)
    dnormal: np.ndarray  # (m, d, n)


def normal_from_jacobian(jacobian: np.ndarray, orient: np.ndarray) -> np.ndarray:
    """Unit normal to the columns of ``jacobian``, oriented so that ``<nu, orient> > 0``."""
    q, _ = np.linalg.qr(jacobian, mode="complete")
    normal = q[..., :, -1]
    flip = np.einsum("mi,mi->m", normal, orient) < 0.0
    normal[flip] *= -1.0
    return normal


class _FiniteDifferenceNormal:
    """Mixin: ``dnu`` from central differences of the normal in parameter space."""

    def _geometry(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _normal(self, params: np.ndarray) -> np.ndarray:
        _, jacobian, z = self._geometry(params)
        return normal_from_jacobian(jacobian, z)

    def evaluate(self, params: np.ndarray) -> PatchSample:
        position, jacobian, z = self._geometry(params)
        normal = normal_from_jacobian(jacobian, z)
        m, n = params.shape
        h = NORMAL_FD_STEP
        shifted = []
        for a in range(n):
            offset = np.zeros(n)
            offset[a] = h
            shifted.extend([params + offset, params - offset])
        stacked = self._normal(np.concatenate(shifted, axis=0)).reshape(2 * n, m, -1)
        dnormal = np.stack([(stacked[2 * a] - stacked[2 * a + 1]) / (2.0 * h) for a in range(n)], axis=-1)
        return PatchSample(params, position, jacobian, normal, dnormal)


@dataclass(frozen=True, eq=False)
class GaussMapPatch:
    """``X = center + radius * Phi_H(z)`` parametrized by its own unit normal ``z``.

    ``support`` is the support function ``H`` of the surface, which need not
    be the norm used for anisotropic curvature.
    """

    support: MinkowskiNorm
    domain: Any
    radius: float = 1.0
    center: np.ndarray | None = None
    kind: str = "gauss-map-patch"

    def __post_init__(self) -> None:
        center = np.zeros(self.ambient_dim) if self.center is None else np.asarray(self.center, float)
        object.__setattr__(self, "center", center)

    @property
    def ambient_dim(self) -> int:
        return self.support.dim_ambient

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    @property
    def closed(self) -> bool:
        return self.domain.closed

    def evaluate(self, params: np.ndarray) -> PatchSample:
        z, dz = self.domain.normals(params)
        grad, hess = self.support.derivatives(z)
        position = self.center + self.radius * grad
        jacobian = self.radius * np.einsum("mij,mja->mia", hess, dz)
        return PatchSample(params, position, jacobian, z, dz)


@dataclass(frozen=True, eq=False)
class PerturbedCapillaryPatch(_FiniteDifferenceNormal):
    """``X = (r0 + eps psi(z)) Phi(z) + r0 omega0 E^F`` over the capillary Wulff domain.

    ``psi = r0 (b / b_top)^2 m(z)`` where ``b`` is the height of the unperturbed
    point, so ``psi`` and its gradient vanish on the boundary: positions and
    tangent planes along the boundary are those of the Wulff cap.
    """

    norm: MinkowskiNorm
    domain: CapDomain
    radius: float
    omega0: float
    e_f: np.ndarray
    epsilon: float
    profile: str = "cos"
    kind: str = "perturbed-capillary"
    closed: bool = False

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise DomainError(f"unknown bump profile {self.profile!r} ({', '.join(PROFILES)})")

    @property
    def ambient_dim(self) -> int:
        return self.norm.dim_ambient

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def bump(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``psi(z)`` and its ambient gradient."""
        b_top = self.domain.top_height
        b = self.domain.height(z)
        grad_b = self.domain.height_gradient(z)
        ratio = b / b_top
        if self.profile == "axial":
            mode, grad_mode = np.ones(len(z)), np.zeros_like(z)
        else:
            mode = z[:, 0]
            grad_mode = np.zeros_like(z)
            grad_mode[:, 0] = 1.0
        psi = self.radius * ratio**2 * mode
        grad_psi = self.radius * (
            (2.0 * ratio * mode / b_top)[:, None] * grad_b + (ratio**2)[:, None] * grad_mode
        )
        return psi, grad_psi

    def _geometry(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        z, dz = self.domain.normals(params)
        phi, hess = self.norm.derivatives(z)
        psi, grad_psi = self.bump(z)
        scale = self.radius + self.epsilon * psi
        position = scale[:, None] * phi + self.radius * self.omega0 * self.e_f
        dpsi = np.einsum("mi,mia->ma", grad_psi, dz)
        jacobian = self.epsilon * phi[:, :, None] * dpsi[:, None, :] + scale[:, None, None] * np.einsum(
            "mij,mja->mia", hess, dz
        )
        return position, jacobian, z


@dataclass(frozen=True, eq=False)
class RadialGraphPatch(_FiniteDifferenceNormal):
    """``X = center + rho(z) z`` with ``rho = r (1 + eps Y(z))`` and ``Y`` a quadratic harmonic."""

    radius: float
    epsilon: float
    ambient_dim: int = 3
    mode: str = "zonal"
    center: np.ndarray | None = None
    kind: str = "radial-graph"
    closed: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", SphereDomain(self.ambient_dim))
        object.__setattr__(self, "quadratic", harmonic_mode_matrix(self.ambient_dim, self.mode))
        center = np.zeros(self.ambient_dim) if self.center is None else np.asarray(self.center, float)
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def _geometry(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        z, dz = self.domain.normals(params)
        qz = z @ self.quadratic
        rho = self.radius * (1.0 + self.epsilon * np.einsum("mi,mi->m", qz, z))
        grad_rho = 2.0 * self.radius * self.epsilon * qz
        drho = np.einsum("mi,mia->ma", grad_rho, dz)
        position = self.center + rho[:, None] * z
        jacobian = z[:, :, None] * drho[:, None, :] + rho[:, None, None] * dz
        return position, jacobian, z


PROFILES = ("cos", "axial")


# ---------------------------------------------------------------------------
# Node geometry
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class NodeGeometry:
    """First and second fundamental data at a set of parameter points."""

    params: np.ndarray
    position: np.ndarray
    jacobian: np.ndarray
    normal: np.ndarray
    frame: np.ndarray  # (m, d, n), orthonormal, spans the tangent space
    metric: np.ndarray  # (m, n, n)
    metric_inverse: np.ndarray
    area_element: np.ndarray
    shape: np.ndarray  # symmetrised dnu in the frame
    asymmetry: np.ndarray

    def __len__(self) -> int:
        return int(self.params.shape[0])

    @property
    def dim(self) -> int:
        return int(self.frame.shape[-1])

    def to_frame(self, vectors: np.ndarray) -> np.ndarray:
        return np.einsum("mia,mi->ma", self.frame, vectors)

    def from_frame(self, components: np.ndarray) -> np.ndarray:
        return np.einsum("mia,ma->mi", self.frame, components)

    def tangential(self, vectors: np.ndarray) -> np.ndarray:
        return vectors - np.einsum("mi,mi->m", vectors, self.normal)[:, None] * self.normal


def build_geometry(sample: PatchSample, *, check_quality: bool = True) -> NodeGeometry:
    frame, upper = np.linalg.qr(sample.jacobian)
    metric = np.einsum("mia,mib->mab", sample.jacobian, sample.jacobian)
    metric_inverse = np.linalg.inv(metric)
    area = np.sqrt(np.linalg.det(metric))
    raw = np.einsum("mia,mib->mab", frame, sample.dnormal) @ np.linalg.inv(upper)
    spread = np.max(np.abs(raw), axis=(-1, -2))
    asymmetry = np.max(np.abs(raw - np.swapaxes(raw, -1, -2)), axis=(-1, -2)) / np.maximum(1.0, spread)
    shape = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    if check_quality and asymmetry.size and float(np.max(asymmetry)) > ASYMMETRY_LIMIT:
        worst = float(np.max(asymmetry))
        raise MeshQualityError(f"shape operator asymmetry {worst:.3e} exceeds {ASYMMETRY_LIMIT:g}", asymmetry=worst)
    return NodeGeometry(
        sample.params,
        sample.position,
        sample.jacobian,
        sample.normal,
        frame,
        metric,
        metric_inverse,
        area,
        shape,
        asymmetry,
    )


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    geometry: NodeGeometry
    conormal: np.ndarray  # outward unit co-normal mu, tangent to the surface
    tangents: np.ndarray  # (b, d, n - 1) orthonormal frame of the boundary
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class Hypersurface:
    name: str
    patch: Any
    mesh: QuadratureMesh
    nodes: NodeGeometry
    weights: np.ndarray
    boundary: BoundaryTrace | None
    descriptor: dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.patch.kind

    @property
    def dim(self) -> int:
        return self.patch.dim

    @property
    def ambient_dim(self) -> int:
        return self.patch.ambient_dim

    @property
    def closed(self) -> bool:
        return self.boundary is None

    @property
    def level(self) -> int:
        return self.mesh.level

    @property
    def node_count(self) -> int:
        return self.mesh.node_count

    @property
    def total_area(self) -> float:
        return math.fsum(self.weights.tolist())

    def sample(self, params: np.ndarray, *, check_quality: bool = True) -> NodeGeometry:
        return build_geometry(self.patch.evaluate(np.asarray(params, dtype=float)), check_quality=check_quality)

    def invariant_residuals(self) -> dict[str, float]:
        """Frame, normal and boundary invariants (all expected below 1e-10)."""
        nodes = self.nodes
        eye = np.eye(self.dim)
        result = {
            "normal_length": float(np.max(np.abs(np.linalg.norm(nodes.normal, axis=-1) - 1.0))),
            "normal_tangency": float(np.max(np.abs(np.einsum("mia,mi->ma", nodes.frame, nodes.normal)))),
            "frame_orthonormality": float(
                np.max(np.abs(np.einsum("mia,mib->mab", nodes.frame, nodes.frame) - eye))
            ),
            "max_asymmetry": float(np.max(nodes.asymmetry)),
        }
        if self.boundary is not None:
            trace = self.boundary
            mu = trace.conormal
            result.update(
                conormal_normal=float(np.max(np.abs(np.einsum("mi,mi->m", mu, trace.geometry.normal)))),
                conormal_length=float(np.max(np.abs(np.linalg.norm(mu, axis=-1) - 1.0))),
                boundary_height=float(np.max(np.abs(trace.geometry.position[:, -1]))),
            )
        return result


def _boundary_trace(patch: Any, mesh: QuadratureMesh) -> BoundaryTrace:
    geometry = build_geometry(patch.evaluate(mesh.boundary_nodes))
    jac = geometry.jacobian
    sides = mesh.boundary_sides[:, None]
    if mesh.dim == 1:
        outward = jac[:, :, 0]
        conormal = sides * outward / np.linalg.norm(outward, axis=-1, keepdims=True)
        tangents = np.zeros(jac.shape[:2] + (0,))
        weights = mesh.boundary_weights.copy()
    else:
        along = jac[:, :, 1]
        length = np.linalg.norm(along, axis=-1)
        tangent = along / length[:, None]
        across = jac[:, :, 0] - np.einsum("mi,mi->m", jac[:, :, 0], tangent)[:, None] * tangent
        conormal = sides * across / np.linalg.norm(across, axis=-1, keepdims=True)
        tangents = tangent[:, :, None]
        weights = mesh.boundary_weights * length
    return BoundaryTrace(geometry, conormal, tangents, weights)


def build_surface(name: str, patch: Any, level: int, descriptor: dict[str, Any] | None = None) -> Hypersurface:
    mesh = closed_mesh(level, patch.dim) if patch.closed else cap_mesh(level, patch.dim)
    nodes = build_geometry(patch.evaluate(mesh.nodes))
    weights = mesh.weights * nodes.area_element
    boundary = None if patch.closed else _boundary_trace(patch, mesh)
    LOG.debug(
        "built %s (%s) at level %d: %d nodes, %d boundary nodes, max asymmetry %.2e",
        name,
        patch.kind,
        level,
        mesh.node_count,
        mesh.boundary_count,
        float(np.max(nodes.asymmetry)),
    )
    return Hypersurface(name, patch, mesh, nodes, weights, boundary, dict(descriptor or {}))


# ---------------------------------------------------------------------------
# Closed catalog surfaces
# ---------------------------------------------------------------------------
def sphere(dim_ambient: int = 3, radius: float = 1.0, level: int = 4, center: Any = None) -> Hypersurface:
    patch = GaussMapPatch(isotropic(dim_ambient), SphereDomain(dim_ambient), radius, center)
    return build_surface("sphere", patch, level, {"surface": "sphere", "radius": radius})


def ellipsoid_surface(axes: Any, level: int = 4) -> Hypersurface:
    """Closed ellipsoid ``sum x_i^2 / a_i^2 = 1`` as the Gauss-map patch of its support function."""
    from .norms import ellipsoid

    semi = np.asarray(axes, dtype=float)
    if np.any(semi <= 0):
        raise ConstructionError("ellipsoid semi-axes must be positive")
    patch = GaussMapPatch(ellipsoid(semi**2), SphereDomain(len(semi)))
    return build_surface("ellipsoid", patch, level, {"surface": "ellipsoid", "axes": semi.tolist()})


def radial_graph(
    dim_ambient: int = 3, radius: float = 1.0, epsilon: float = 0.1, level: int = 4, mode: str = "zonal"
) -> Hypersurface:
    patch = RadialGraphPatch(radius, epsilon, dim_ambient, mode)
    descriptor = {"surface": "radial-graph", "radius": radius, "eps": epsilon, "mode": mode}
    return build_surface("radial-graph", patch, level, descriptor)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------
def elementary_symmetric(kappa: Any) -> np.ndarray:
    """``sigma_0..sigma_n`` of the last axis via the ``prod (1 + kappa_i t)`` recurrence."""
    values = np.asarray(kappa, dtype=float)
    n = values.shape[-1]
    sigma = np.zeros(values.shape[:-1] + (n + 1,))
    sigma[..., 0] = 1.0
    for i in range(n):
        for j in range(i + 1, 0, -1):
            sigma[..., j] = sigma[..., j] + values[..., i] * sigma[..., j - 1]
    return sigma


def binomials(n: int) -> np.ndarray:
    return np.array([comb(n, k, exact=True) for k in range(n + 1)], dtype=float)


def symmetric_functions(kappa: Any) -> tuple[np.ndarray, np.ndarray]:
    """``(sigma_0..sigma_n, H_0..H_n)`` with ``H_k = sigma_k / C(n, k)``."""
    values = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("curvatures must be finite")
    sigma = elementary_symmetric(values)
    return sigma, sigma / binomials(values.shape[-1])


def newton_operators(s_f: Any, sigma: Any) -> np.ndarray:
    """``P_0 = I``, ``P_k = sigma_k I - P_{k-1} S_F``; stacked on axis ``-3``."""
    matrix = np.asarray(s_f, dtype=float)
    coeffs = np.asarray(sigma, dtype=float)
    n = matrix.shape[-1]
    eye = np.broadcast_to(np.eye(n), matrix.shape)
    operators = [eye.copy()]
    for k in range(1, n + 1):
        operators.append(coeffs[..., k, None, None] * eye - operators[-1] @ matrix)
    return np.stack(operators, axis=-3)


def _check_newton_symmetry(shape: np.ndarray, operators: np.ndarray) -> float:
    products = shape[..., None, :, :] @ operators
    gap = np.abs(products - np.swapaxes(products, -1, -2))
    scale = np.maximum(1.0, np.max(np.abs(products)))
    worst = float(np.max(gap) / scale) if gap.size else 0.0
    if worst > NEWTON_SYMMETRY_LIMIT:
        raise ConsistencyError(f"dnu o P_k is not symmetric (relative gap {worst:.3e})")
    return worst


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Per-node anisotropic curvature data for one norm."""

    shape: np.ndarray
    a_f: np.ndarray
    s_f: np.ndarray
    kappa: np.ndarray
    sigma: np.ndarray
    mean: np.ndarray
    newton: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.kappa.shape[-1])

    def H(self, k: int) -> np.ndarray:
        """``H_k^F`` per node, with ``H_{n+1} = 0``."""
        if k == self.dim + 1:
            return np.zeros(self.kappa.shape[0])
        if not 0 <= k <= self.dim:
            raise DomainError(f"curvature index {k} outside 0..{self.dim + 1}")
        return self.mean[:, k]

    def apply_newton(self, k: int, components: np.ndarray) -> np.ndarray:
        return np.einsum("mab,mb->ma", self.newton[:, k], components)

    @cached_property
    def trace_residual(self) -> float:
        trace = np.trace(self.s_f, axis1=-2, axis2=-1)
        det = np.linalg.det(self.s_f)
        n = self.dim
        scale = np.maximum(1.0, np.max(np.abs(self.kappa), axis=-1))
        gap_trace = np.abs(trace - self.sigma[:, 1]) / scale
        gap_det = np.abs(det - self.sigma[:, n]) / scale**n
        return float(max(np.max(gap_trace, initial=0.0), np.max(gap_det, initial=0.0)))


def curvature_field(geometry: NodeGeometry, norm: MinkowskiNorm) -> CurvatureField:
    if norm.dim_ambient != geometry.normal.shape[-1]:
        raise DomainError("norm and surface live in different dimensions")
    shape = geometry.shape
    a_f = norm.a_f(geometry.normal, basis=geometry.frame)
    a_f = 0.5 * (a_f + np.swapaxes(a_f, -1, -2))
    s_f = a_f @ shape

    eigvals = np.linalg.eigvals(s_f)
    magnitude = np.maximum(1.0, np.max(np.abs(eigvals), axis=-1))
    residue = float(np.max(np.abs(eigvals.imag).max(axis=-1) / magnitude, initial=0.0))
    if residue > COMPLEX_RESIDUE_LIMIT:
        raise CurvatureError(f"anisotropic Weingarten map has complex spectrum (residue {residue:.3e})")

    a_eigvals, a_vecs = np.linalg.eigh(a_f)
    if np.min(a_eigvals, initial=1.0) <= 0.0:
        raise AdmissibilityError("A_F is not positive definite on the surface")
    root = a_vecs @ (np.sqrt(a_eigvals)[..., None] * np.swapaxes(a_vecs, -1, -2))
    kappa = np.linalg.eigvalsh(root @ shape @ root)

    sigma, mean = symmetric_functions(kappa)
    newton = newton_operators(s_f, sigma)
    _check_newton_symmetry(shape, newton)
    field_ = CurvatureField(shape, a_f, s_f, kappa, sigma, mean, newton)
    if field_.trace_residual > TRACE_LIMIT:
        raise ConsistencyError(f"tr/det of S_F disagree with sigma_1/sigma_n ({field_.trace_residual:.3e})")
    return field_


def shape_operator(surface: Hypersurface, node: int) -> np.ndarray:
    """``dnu`` at one node, in that node's orthonormal frame."""
    return surface.nodes.shape[node].copy()


def anisotropic_shape_operator(
    surface: Hypersurface, norm: MinkowskiNorm, node: int
) -> tuple[np.ndarray, np.ndarray]:
    """``(S_F, kappa^F)`` at one node; ``kappa^F`` sorted ascending."""
    nodes = surface.nodes
    single = NodeGeometry(
        nodes.params[node : node + 1],
        nodes.position[node : node + 1],
        nodes.jacobian[node : node + 1],
        nodes.normal[node : node + 1],
        nodes.frame[node : node + 1],
        nodes.metric[node : node + 1],
        nodes.metric_inverse[node : node + 1],
        nodes.area_element[node : node + 1],
        nodes.shape[node : node + 1],
        nodes.asymmetry[node : node + 1],
    )
    field_ = curvature_field(single, norm)
    return field_.s_f[0], field_.kappa[0]


# ---------------------------------------------------------------------------
# Finite-difference surface calculus
# ---------------------------------------------------------------------------
def fd_step(surface: Hypersurface, fd_scale: float) -> float:
    return fd_scale * surface.mesh.spacing


def _shifted_params(params: np.ndarray, delta: float) -> np.ndarray:
    m, n = params.shape
    stack = []
    for a in range(n):
        offset = np.zeros(n)
        offset[a] = delta
        stack.extend([params + offset, params - offset])
    return np.concatenate(stack, axis=0)


def _parameter_partials(values: np.ndarray, m: int, n: int, delta: float) -> np.ndarray:
    """Central differences from an evaluation on :func:`_shifted_params` output."""
    blocks = values.reshape((2 * n, m) + values.shape[1:])
    return np.stack([(blocks[2 * a] - blocks[2 * a + 1]) / (2.0 * delta) for a in range(n)], axis=1)


def surface_divergence(
    geometry: NodeGeometry, vector_field: Any, delta: float
) -> np.ndarray:
    """``div V = g^{ab} <d_a V, d_b X>`` with ``V`` given as a function of parameters."""
    m, n = geometry.params.shape
    values = vector_field(_shifted_params(geometry.params, delta))
    partials = _parameter_partials(values, m, n, delta)  # (m, n, d)
    pairing = np.einsum("mai,mib->mab", partials, geometry.jacobian)
    return np.einsum("mab,mab->m", geometry.metric_inverse, pairing)


def surface_gradient(geometry: NodeGeometry, scalar_field: Any, delta: float) -> np.ndarray:
    """``grad f = g^{ab} d_b f d_a X`` as an ambient tangent vector."""
    m, n = geometry.params.shape
    values = scalar_field(_shifted_params(geometry.params, delta))
    partials = _parameter_partials(values, m, n, delta)  # (m, n)
    coeffs = np.einsum("mab,mb->ma", geometry.metric_inverse, partials)
    return np.einsum("mia,ma->mi", geometry.jacobian, coeffs)
