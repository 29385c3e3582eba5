"""Named norms, surfaces and checks addressable from the command line.

Everything the CLI accepts by name resolves here; unknown names raise
:class:`UsageError` listing the valid choices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .capillary import (
    CapillarySurface,
    capillary_wulff,
    closed_capillary,
    perturbed_capillary,
    sphere_cap,
)
from .checks import (
    CheckReport,
    RelationSpec,
    RELATION_KINDS,
    SurfaceCase,
    TolerancePolicy,
    check_algebra,
    check_boundary_lemmas,
    check_cap_area,
    check_corollary,
    check_curvature_invariants,
    check_divergence_identity,
    check_gradient_identity,
    check_heintze_karcher,
    check_hsiung_minkowski,
    check_isotropic_minkowski,
    check_newton_divergence,
    check_norm,
    check_rigidity_relations,
    check_solver_convergence,
    check_solver_uniqueness,
    check_support_constancy,
)
from .config import SolverConfig
from .errors import UsageError
from .norms import DEFAULT_STEP, MinkowskiNorm, ellipsoid, harmonic, isotropic, load_norm_file
from .surfaces import PROFILES, ellipsoid_surface, radial_graph, sphere
from .weights import WEIGHTS, get_weight


def _choose(kind: str, name: str, valid: object) -> UsageError:
    return UsageError(f"unknown {kind} {name!r}; valid: {', '.join(sorted(valid))}")


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------
def _ellipsoid_norm(dim: int, **options: Any) -> MinkowskiNorm:
    return ellipsoid([1.0] * (dim - 1) + [4.0], label="ellipsoid", **options)


NORMS: dict[str, Callable[..., MinkowskiNorm]] = {
    "isotropic": lambda dim, **options: isotropic(dim, label="isotropic", **options),
    "ellipsoid": _ellipsoid_norm,
    "harmonic": lambda dim, **options: harmonic(dim, 0.1, "zonal", label="harmonic", **options),
    "harmonic-tesseral": lambda dim, **options: harmonic(dim, 0.08, "tesseral", label="harmonic-tesseral", **options),
}


def resolve_norm(
    name: str, dim: int = 3, *, step: float = DEFAULT_STEP, admissibility_nodes: int = 0
) -> MinkowskiNorm:
    """A catalog norm by name, or a JSON norm document when ``name`` is a file path.

    ``step`` is the finite-difference step for numeric derivatives and
    ``admissibility_nodes`` the sphere sample used by the admissibility check
    (0 picks the per-dimension default).
    """
    options = {"step": step, "admissibility_nodes": admissibility_nodes}
    path = Path(name).expanduser()
    if path.suffix == ".json" and path.is_file():
        norm = load_norm_file(path, **options)
        if norm.dim_ambient != dim:
            raise UsageError(f"norm document {path} is {norm.dim_ambient}-dimensional, expected {dim}")
        return norm
    try:
        factory = NORMS[name]
    except KeyError:
        raise _choose("norm", name, NORMS) from None
    return factory(dim, **options)


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SurfaceRequest:
    surface: str = "capillary-wulff"
    norm: str = "ellipsoid"
    dim: int = 3
    r0: float = 1.0
    omega0: float = -0.3
    eps: float = 0.05
    psi_mode: str = "cos"
    theta: float = math.pi / 3
    step: float = DEFAULT_STEP
    admissibility_nodes: int = 0

    def build_norm(self) -> MinkowskiNorm:
        return resolve_norm(self.norm, self.dim, step=self.step, admissibility_nodes=self.admissibility_nodes)

    def label(self) -> str:
        base = f"{self.surface}[{self.norm}, n+1={self.dim}"
        if self.surface in ("capillary-wulff", "perturbed-capillary"):
            base += f", r0={self.r0:g}, omega0={self.omega0:g}"
        if self.surface == "perturbed-capillary":
            base += f", eps={self.eps:g}, psi={self.psi_mode}"
        if self.surface == "sphere-cap":
            base += f", theta={self.theta:.4g}, r0={self.r0:g}"
        if self.surface == "radial-graph":
            base += f", eps={self.eps:g}"
        return base + "]"


def _wulff(req: SurfaceRequest, level: int) -> CapillarySurface:
    return capillary_wulff(req.build_norm(), req.r0, req.omega0, level)


def _perturbed(req: SurfaceRequest, level: int) -> CapillarySurface:
    if req.psi_mode not in PROFILES:
        raise _choose("perturbation profile", req.psi_mode, PROFILES)
    return perturbed_capillary(_wulff(req, level), req.eps, req.psi_mode)


def _closed_sphere(req: SurfaceRequest, level: int) -> CapillarySurface:
    norm = req.build_norm()
    return closed_capillary(sphere(req.dim, req.r0, level), norm, radius=req.r0, wulff=norm.family == "isotropic")


def _closed_ellipsoid(req: SurfaceRequest, level: int) -> CapillarySurface:
    axes = [1.0] * (req.dim - 1) + [1.5]
    return closed_capillary(ellipsoid_surface(axes, level), req.build_norm())


def _closed_graph(req: SurfaceRequest, level: int) -> CapillarySurface:
    surface = radial_graph(req.dim, req.r0, req.eps, level, "tesseral" if req.dim == 3 else "zonal")
    return closed_capillary(surface, req.build_norm(), radius=req.r0)


SURFACES: dict[str, Callable[[SurfaceRequest, int], CapillarySurface]] = {
    "capillary-wulff": _wulff,
    "perturbed-capillary": _perturbed,
    "sphere-cap": lambda req, level: sphere_cap(req.dim, req.theta, req.r0, level),
    "sphere": _closed_sphere,
    "ellipsoid": _closed_ellipsoid,
    "radial-graph": _closed_graph,
}


def surface_case(request: SurfaceRequest) -> SurfaceCase:
    try:
        builder = SURFACES[request.surface]
    except KeyError:
        raise _choose("surface", request.surface, SURFACES) from None
    request.build_norm()
    return SurfaceCase(request.label(), lambda level: builder(request, level), {"request": request})


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CheckRequest:
    """Options for one ``verify <check-id>`` invocation."""

    surface: SurfaceRequest = SurfaceRequest()
    weight: str = "const"
    k: int | None = None
    relation: str = "soliton"
    samples: int = 10_000
    p: float = 3.0
    ladder: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)


Runner = Callable[[CheckRequest, TolerancePolicy], list[CheckReport]]


def _indices(request: CheckRequest, dim: int) -> list[int]:
    return list(range(dim - 1)) if request.k is None else [request.k]


def _per_k(check: Callable[..., CheckReport]) -> Runner:
    def run(request: CheckRequest, policy: TolerancePolicy) -> list[CheckReport]:
        case = surface_case(request.surface)
        weight = get_weight(request.weight)
        return [check(case, weight, k, policy=policy) for k in _indices(request, request.surface.dim)]

    return run


def _hsiung(request: CheckRequest, policy: TolerancePolicy) -> list[CheckReport]:
    case = surface_case(request.surface)
    weight = get_weight(request.weight)
    return [
        check_hsiung_minkowski(case, weight, k, policy=policy, ladder=request.ladder)
        for k in _indices(request, request.surface.dim)
    ]


def _on_case(check: Callable[..., CheckReport]) -> Runner:
    return lambda request, policy: [check(surface_case(request.surface), policy=policy)]


def _rigidity(request: CheckRequest, policy: TolerancePolicy) -> list[CheckReport]:
    if request.relation not in RELATION_KINDS:
        raise _choose("relation", request.relation, RELATION_KINDS)
    return [check_rigidity_relations(surface_case(request.surface), RelationSpec(request.relation), policy=policy)]


def _solver_options(config: SolverConfig) -> dict[str, float]:
    return {"max_iterations": config.max_iterations, "tolerance": config.tolerance, "damping_floor": config.damping_floor}


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    summary: str
    run: Runner
    default_surface: str | None = None


CHECKS: dict[str, CheckSpec] = {
    spec.check_id: spec
    for spec in (
        CheckSpec("hsiung-minkowski", "weighted capillary Minkowski formula", _hsiung, "capillary-wulff"),
        CheckSpec(
            "corollary-inequalities",
            "sign of the Minkowski difference for monotone weights",
            _per_k(check_corollary),
            "perturbed-capillary",
        ),
        CheckSpec("boundary-lemmas", "S_F, xi and P_k xi along the contact boundary", _on_case(check_boundary_lemmas), "capillary-wulff"),
        CheckSpec(
            "divergence-identity",
            "pointwise div P_k xi against curvature terms",
            lambda req, policy: [check_divergence_identity(surface_case(req.surface), req.k, policy=policy)],
            "perturbed-capillary",
        ),
        CheckSpec("gradient-identity", "grad u_bar = D^-2 dnu(xi)", _on_case(check_gradient_identity), "perturbed-capillary"),
        CheckSpec(
            "heintze-karcher",
            "int D/H_1 >= int <X,nu>",
            lambda req, policy: [check_heintze_karcher(surface_case(req.surface), policy=policy, ladder=req.ladder)],
            "perturbed-capillary",
        ),
        CheckSpec(
            "newton-maclaurin",
            "Newton-Maclaurin inequalities on random curvature vectors",
            lambda req, policy: [check_algebra("newton-maclaurin", req.samples, policy=policy)],
        ),
        CheckSpec(
            "coefficient-inequality",
            "weighted curvature-coefficient inequality on random instances",
            lambda req, policy: [check_algebra("coefficient-inequality", req.samples, policy=policy)],
        ),
        CheckSpec("rigidity-relations", "curvature relations on Wulff shapes and witnesses elsewhere", _rigidity, "capillary-wulff"),
        CheckSpec("support-constancy", "constancy of u_bar", _on_case(check_support_constancy), "capillary-wulff"),
        CheckSpec("newton-divergence", "divergence identities of P_k on closed surfaces", _on_case(check_newton_divergence), "ellipsoid"),
        CheckSpec("isotropic-minkowski", "classical weighted Minkowski formula", _per_k(check_isotropic_minkowski), "radial-graph"),
        CheckSpec("curvature-invariants", "Cayley-Hamilton, traces and Wulff curvatures", _on_case(check_curvature_invariants), "capillary-wulff"),
        CheckSpec(
            "quadrature-area",
            "area and boundary measure of round caps",
            lambda req, policy: [
                check_cap_area(surface_case(replace(req.surface, surface="sphere-cap", norm="isotropic")), req.surface.theta, policy=policy)
            ],
            "sphere-cap",
        ),
        CheckSpec(
            "norm-duality",
            "duality, homogeneity and derivatives of a norm",
            lambda req, policy: [
                check_norm(req.surface.build_norm(), f"{req.surface.norm} n+1={req.surface.dim}", policy=policy)
            ],
        ),
        CheckSpec(
            "minkowski-convergence",
            "1-D capillary L_p Minkowski solver against manufactured solutions",
            lambda req, policy: [check_solver_convergence(req.surface.theta, req.p, **_solver_options(req.solver))],
        ),
        CheckSpec(
            "minkowski-uniqueness",
            "multi-start uniqueness of the 1-D solver",
            lambda req, policy: [
                check_solver_uniqueness(
                    req.surface.theta,
                    req.p,
                    starts=req.solver.starts,
                    grid=req.solver.grid,
                    seed=policy.seed,
                    **_solver_options(req.solver),
                )
            ],
        ),
    )
}


def get_check(check_id: str) -> CheckSpec:
    try:
        return CHECKS[check_id]
    except KeyError:
        raise _choose("check", check_id, CHECKS) from None


def run_check(check_id: str, request: CheckRequest, policy: TolerancePolicy) -> list[CheckReport]:
    spec = get_check(check_id)
    if request.surface.surface not in SURFACES:
        raise _choose("surface", request.surface.surface, SURFACES)
    if request.weight not in WEIGHTS:
        raise _choose("weight", request.weight, WEIGHTS)
    return spec.run(request, policy)


# ---------------------------------------------------------------------------
# Default suite
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SuiteEntry:
    check_id: str
    label: str
    run: Callable[[TolerancePolicy], CheckReport]


WULFF = SurfaceRequest("capillary-wulff", "ellipsoid", 3, 1.0, -0.3)
WULFF_HARMONIC = SurfaceRequest("capillary-wulff", "harmonic", 3, 1.2, 0.2)
WULFF_PLANE = SurfaceRequest("capillary-wulff", "ellipsoid", 2, 1.0, -0.3)
PERTURBED = replace(WULFF, surface="perturbed-capillary", eps=0.05)
PERTURBED_AXIAL = replace(WULFF, surface="perturbed-capillary", eps=0.05, psi_mode="axial", norm="isotropic")
HEMISPHERE = SurfaceRequest("sphere-cap", "isotropic", 3, theta=math.pi / 2)
CLOSED_ELLIPSOID = SurfaceRequest("ellipsoid", "harmonic", 3)
CLOSED_SPHERE = SurfaceRequest("sphere", "isotropic", 3)
CLOSED_GRAPH = SurfaceRequest("radial-graph", "isotropic", 3, eps=0.1)


def default_suite(solver: SolverConfig | None = None) -> list[SuiteEntry]:
    """The full ``verify all`` run, in report order."""
    solver = solver or SolverConfig()
    cases = {
        req: surface_case(req)
        for req in (WULFF, WULFF_HARMONIC, WULFF_PLANE, PERTURBED, PERTURBED_AXIAL, HEMISPHERE, CLOSED_ELLIPSOID, CLOSED_SPHERE, CLOSED_GRAPH)
    }
    entries: list[SuiteEntry] = []

    def add(check_id: str, req: SurfaceRequest | None, run: Callable[[TolerancePolicy], CheckReport], extra: str = "") -> None:
        label = (cases[req].label if req is not None else check_id) + (f" {extra}" if extra else "")
        entries.append(SuiteEntry(check_id, label, run))

    for name, dim in (("isotropic", 3), ("ellipsoid", 3), ("harmonic", 3), ("ellipsoid", 2)):
        add("norm-duality", None, lambda policy, name=name, dim=dim: check_norm(resolve_norm(name, dim), f"{name} n+1={dim}", policy=policy), f"{name} n+1={dim}")

    for req in (WULFF, WULFF_HARMONIC, CLOSED_ELLIPSOID, CLOSED_SPHERE):
        for k in range(req.dim - 1):
            add("hsiung-minkowski", req, lambda policy, c=cases[req], k=k: check_hsiung_minkowski(c, WEIGHTS["const"], k, policy=policy), f"f=const k={k}")
    add("hsiung-minkowski", WULFF_PLANE, lambda policy: check_hsiung_minkowski(cases[WULFF_PLANE], WEIGHTS["u"], 0, policy=policy), "f=u k=0")
    for weight in ("u", "u2", "exp_neg"):
        for k in (0, 1):
            add(
                "hsiung-minkowski",
                PERTURBED,
                lambda policy, w=weight, k=k: check_hsiung_minkowski(cases[PERTURBED], WEIGHTS[w], k, policy=policy, ladder=True),
                f"f={weight} k={k} ladder",
            )

    for req, weight in ((PERTURBED, "u"), (PERTURBED, "exp_neg"), (PERTURBED_AXIAL, "softplus"), (WULFF, "u")):
        for k in (0, 1):
            add("corollary-inequalities", req, lambda policy, c=cases[req], w=weight, k=k: check_corollary(c, WEIGHTS[w], k, policy=policy), f"f={weight} k={k}")

    for req in (WULFF, WULFF_HARMONIC, WULFF_PLANE, PERTURBED, PERTURBED_AXIAL, HEMISPHERE):
        add("boundary-lemmas", req, lambda policy, c=cases[req]: check_boundary_lemmas(c, policy=policy))

    for req in (WULFF, PERTURBED, WULFF_PLANE):
        add("divergence-identity", req, lambda policy, c=cases[req]: check_divergence_identity(c, policy=policy))
    for req in (PERTURBED, PERTURBED_AXIAL):
        add("gradient-identity", req, lambda policy, c=cases[req]: check_gradient_identity(c, policy=policy))

    for req in (WULFF, WULFF_HARMONIC, PERTURBED, HEMISPHERE):
        add("heintze-karcher", req, lambda policy, c=cases[req]: check_heintze_karcher(c, policy=policy))

    add("newton-maclaurin", None, lambda policy: check_algebra("newton-maclaurin", 10_000, policy=policy))
    add("coefficient-inequality", None, lambda policy: check_algebra("coefficient-inequality", 10_000, policy=policy))

    for kind in RELATION_KINDS:
        for req in (WULFF, WULFF_HARMONIC):
            add("rigidity-relations", req, lambda policy, c=cases[req], kind=kind: check_rigidity_relations(c, RelationSpec(kind), policy=policy), kind)
    for kind in ("soliton", "power-bounds", "linear-combination-constant"):
        add("rigidity-relations", PERTURBED, lambda policy, kind=kind: check_rigidity_relations(cases[PERTURBED], RelationSpec(kind), policy=policy), kind)

    for req in (WULFF, WULFF_HARMONIC, WULFF_PLANE, PERTURBED):
        add("support-constancy", req, lambda policy, c=cases[req]: check_support_constancy(c, policy=policy))

    for req in (CLOSED_ELLIPSOID, CLOSED_GRAPH):
        add("newton-divergence", req, lambda policy, c=cases[req]: check_newton_divergence(c, policy=policy))
    for k in (0, 1):
        add("isotropic-minkowski", CLOSED_GRAPH, lambda policy, k=k: check_isotropic_minkowski(cases[CLOSED_GRAPH], WEIGHTS["u"], k, policy=policy), f"f=u k={k}")

    for req in (WULFF, WULFF_HARMONIC, PERTURBED, CLOSED_ELLIPSOID):
        add("curvature-invariants", req, lambda policy, c=cases[req]: check_curvature_invariants(c, policy=policy))

    cap_plane = surface_case(SurfaceRequest("sphere-cap", "isotropic", 2, theta=1.0))
    add("quadrature-area", None, lambda policy: check_cap_area(cases[HEMISPHERE], math.pi / 2, policy=policy), "hemisphere")
    add("quadrature-area", None, lambda policy: check_cap_area(cap_plane, 1.0, policy=policy), "arc theta=1")

    options = _solver_options(solver)
    for p in (3.0, 2.0, 1.0):
        add("minkowski-convergence", None, lambda policy, p=p: check_solver_convergence(math.pi / 3, p, **options), f"p={p:g}")
    for p in (3.0, 2.0, 1.0):
        add(
            "minkowski-uniqueness",
            None,
            lambda policy, p=p: check_solver_uniqueness(math.pi / 3, p, starts=solver.starts, grid=solver.grid, seed=policy.seed, **options),
            f"p={p:g}",
        )
    return entries
