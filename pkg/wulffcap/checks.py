"""Identity and inequality checks on discretised capillary hypersurfaces.

Every check produces a :class:`CheckReport`.  Verdicts are pure functions of
the computed residuals and the :class:`TolerancePolicy`; nothing here prints.

Integral identities pass when the relative residual stays under
``max(identity, quadrature_factor * estimate)``, where ``estimate`` is the
change of either side between the two finest levels of a ladder.  Pointwise
finite-difference identities pass on their fitted convergence order.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .algebra import coefficient_inequality_sweep, newton_maclaurin_sweep
from .capillary import (
    CapillarySurface,
    boundary_condition_residual,
    capillary_fields,
    capillary_support,
    support_gradient,
)
from .config import DEFAULT_SEED, AppConfig, RunConfig, ToleranceConfig
from .errors import DomainError
from .logging import get_logger
from .norms import (
    MinkowskiNorm,
    WulffShapeSpec,
    cahn_hoffman,
    cauchy_schwarz_sweep,
    check_dual_homogeneity,
    check_homogeneity,
    dual_norm,
    random_unit_vectors,
    wulff_points,
)
from .quadrature import ConvergenceFit, boundary_integrate, convergence_fit, enclosed_volume, integrate
from .solver import (
    CapillaryBVP,
    manufactured_profile,
    scaling_covariance,
    self_convergence,
    uniqueness_experiment,
)
from .surfaces import (
    binomials,
    curvature_field,
    fd_step,
    newton_operators,
    surface_divergence,
    surface_gradient,
    symmetric_functions,
)
from .weights import WeightFunction

LOG = get_logger(__name__)

FD_MIN_ORDER = 0.9
QUADRATURE_MIN_ORDER = 1.8
CROSS_CHECK_STEP = 1e-4
CROSS_CHECK_LIMIT = 1e-6
ROUNDOFF_FACTOR = 16.0
SPREAD_WITNESS = 1e-3


# ---------------------------------------------------------------------------
# Policy and report types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TolerancePolicy:
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    level: int = 4
    levels: tuple[int, ...] = (3, 4, 5)
    fd_scale: float = 0.25
    seed: int = DEFAULT_SEED

    @classmethod
    def from_config(cls, config: AppConfig, run: RunConfig | None = None) -> "TolerancePolicy":
        tolerances = run.tolerances(config.tolerances) if run else config.tolerances
        return cls(
            tolerances=tolerances,
            level=run.level if run else config.ladder.level,
            levels=tuple(run.levels if run else config.ladder.levels),
            fd_scale=config.ladder.fd_scale,
            seed=run.seed if run else config.output.seed,
        )

    def identity_threshold(self, estimate: float) -> float:
        return max(self.tolerances.identity, self.tolerances.quadrature_factor * estimate)

    @property
    def strict_margin(self) -> float:
        return self.tolerances.inequality_margin_factor * self.tolerances.identity

    @property
    def ladder_floor(self) -> float:
        return self.tolerances.pointwise


@dataclass(frozen=True)
class LadderLevel:
    level: int
    nodes: int
    lhs: float
    rhs: float
    residual: float

    def to_payload(self) -> dict[str, Any]:
        return {"level": self.level, "nodes": self.nodes, "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual}


@dataclass
class CheckReport:
    check_id: str
    case: str
    verdict: str
    residual: float | None
    tolerance: float | None
    lhs: float | None = None
    rhs: float | None = None
    surface: dict[str, Any] = field(default_factory=dict)
    indices: dict[str, Any] = field(default_factory=dict)
    weight: str | None = None
    ladder: list[LadderLevel] = field(default_factory=list)
    fit: ConvergenceFit | None = None
    details: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_payload(self) -> dict[str, Any]:
        return {
            "check": self.check_id,
            "case": self.case,
            "verdict": self.verdict,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "surface": self.surface,
            "indices": self.indices,
            "weight": self.weight,
            "ladder": [level.to_payload() for level in self.ladder],
            "order": None if self.fit is None else self.fit.to_payload(),
            "details": _plain(self.details),
        }


def _plain(value: Any) -> Any:
    """JSON-friendly copy: numpy scalars/arrays become Python numbers/lists."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# ---------------------------------------------------------------------------
# Surface cases
# ---------------------------------------------------------------------------
@dataclass(eq=False)
class SurfaceCase:
    """A named surface family that can be rebuilt at any refinement level."""

    label: str
    builder: Callable[[int], CapillarySurface]
    parameters: dict[str, Any] = field(default_factory=dict)
    _cache: dict[int, CapillarySurface] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def build(self, level: int) -> CapillarySurface:
        with self._lock:
            if level not in self._cache:
                self._cache[level] = self.builder(level)
            return self._cache[level]


def as_case(target: SurfaceCase | CapillarySurface) -> SurfaceCase:
    if isinstance(target, SurfaceCase):
        return target

    def fixed(level: int) -> CapillarySurface:
        if level != target.level:
            raise DomainError(f"surface was built at level {target.level}; pass a SurfaceCase to refine it")
        return target

    return SurfaceCase(target.surface.name, fixed, target.describe())


def _levels(case: SurfaceCase, policy: TolerancePolicy, ladder: bool) -> list[int]:
    return list(policy.levels) if ladder else [policy.level]


@dataclass(frozen=True)
class Terms:
    lhs: float
    rhs: float
    scale: float
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / self.scale if self.scale > 0 else abs(self.lhs - self.rhs)


def _ladder_run(
    case: SurfaceCase, levels: Sequence[int], evaluate: Callable[[CapillarySurface], Terms]
) -> tuple[list[LadderLevel], Terms, CapillarySurface, float]:
    ladder: list[LadderLevel] = []
    history: list[Terms] = []
    cap = None
    for level in levels:
        cap = case.build(level)
        terms = evaluate(cap)
        history.append(terms)
        ladder.append(LadderLevel(level, cap.surface.node_count, terms.lhs, terms.rhs, terms.residual))
    assert cap is not None
    estimate = 0.0
    if len(history) >= 2:
        prev, last = history[-2], history[-1]
        scale = last.scale if last.scale > 0 else 1.0
        estimate = max(abs(last.lhs - prev.lhs), abs(last.rhs - prev.rhs)) / scale
    return ladder, history[-1], cap, estimate


def _fit(ladder: Sequence[LadderLevel], policy: TolerancePolicy, values: Sequence[float] | None = None) -> ConvergenceFit | None:
    if len(ladder) < 3:
        return None
    errors = [level.residual for level in ladder] if values is None else list(values)
    return convergence_fit(errors, None, [2.0**-level.level for level in ladder], floor=policy.ladder_floor)


def _check_index(cap: CapillarySurface, k: int) -> None:
    if not 0 <= k <= cap.dim - 1:
        raise DomainError(f"curvature index k={k} must lie in 0..{cap.dim - 1}")


# ---------------------------------------------------------------------------
# Minkowski-type formulas
# ---------------------------------------------------------------------------
def _minkowski_terms(cap: CapillarySurface, weight: WeightFunction, k: int) -> tuple[Terms, dict[str, np.ndarray]]:
    _check_index(cap, k)
    n = cap.dim
    curv, fields, geom = cap.curvature, cap.fields, cap.surface.nodes
    u = fields.support
    f, df = weight(u), weight.derivative(u)
    grad_u = np.einsum("mab,mb->ma", geom.shape, fields.xi_frame) / fields.denominator[:, None] ** 2
    grad_f = df[:, None] * grad_u
    newton_xi = curv.apply_newton(k, fields.xi_frame)
    c = (n - k) * binomials(n)[k]
    term_a = f * curv.H(k) * fields.denominator
    term_b = f * curv.H(k + 1) * fields.pairing
    term_c = np.einsum("ma,ma->m", grad_f, newton_xi)
    lhs = integrate(cap.surface, term_a) - integrate(cap.surface, term_b)
    rhs = -integrate(cap.surface, term_c) / c
    scale = (
        integrate(cap.surface, np.abs(term_a))
        + integrate(cap.surface, np.abs(term_b))
        + integrate(cap.surface, np.abs(term_c)) / c
    )
    return Terms(lhs, rhs, scale), {"grad_f": geom.from_frame(grad_f), "support": u}


def _gradient_cross_check(cap: CapillarySurface, weight: WeightFunction, grad_f: np.ndarray, seed: int) -> float:
    """Compare the analytic ``grad f(u_bar)`` with central differences on ~1% of the nodes."""
    rng = np.random.default_rng(seed)
    count = max(1, cap.surface.node_count // 100)
    picks = np.sort(rng.choice(cap.surface.node_count, size=count, replace=False))
    params = cap.surface.nodes.params[picks]
    geom = cap.surface.sample(params, check_quality=False)

    def f_of_params(p: np.ndarray) -> np.ndarray:
        sampled = cap.surface.sample(p, check_quality=False)
        return weight(capillary_fields(sampled, cap.context).support)

    numeric = surface_gradient(geom, f_of_params, CROSS_CHECK_STEP)
    analytic = grad_f[picks]
    return float(np.max(np.abs(numeric - analytic)) / (1.0 + np.max(np.abs(analytic))))


def check_hsiung_minkowski(
    target: SurfaceCase | CapillarySurface,
    weight: WeightFunction,
    k: int,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
    ladder: bool = False,
    min_order: float | None = QUADRATURE_MIN_ORDER,
) -> CheckReport:
    """``int f (H_k D - H_{k+1} <X,nu>) = -1/((n-k) C(n,k)) int <grad f, P_k xi>``.

    With a constant weight this is the plain Minkowski formula, and with
    ``omega0 = 0`` on a closed surface it is the closed-surface formula.
    """
    case = as_case(target)
    ladder_levels, terms, cap, estimate = _ladder_run(
        case, _levels(case, policy, ladder), lambda c: _minkowski_terms(c, weight, k)[0]
    )
    _, extras = _minkowski_terms(cap, weight, k)
    cross = _gradient_cross_check(cap, weight, extras["grad_f"], policy.seed)
    tolerance = policy.identity_threshold(estimate)
    fit = _fit(ladder_levels, policy)
    ok = terms.residual <= tolerance and cross <= CROSS_CHECK_LIMIT
    if fit is not None and min_order is not None:
        ok = ok and fit.meets(min_order)
    return CheckReport(
        "hsiung-minkowski",
        case.label,
        _verdict(ok),
        terms.residual,
        tolerance,
        terms.lhs,
        terms.rhs,
        cap.describe(),
        {"k": k},
        weight.name,
        ladder_levels,
        fit,
        {"gradient_cross_check": cross, "quadrature_estimate": estimate, "scale": terms.scale},
    )


def check_corollary(
    target: SurfaceCase | CapillarySurface,
    weight: WeightFunction,
    k: int,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
) -> CheckReport:
    """Sign of ``int f H_k D - int f H_{k+1} <X,nu>`` from the monotonicity of ``f``.

    Increasing weights give ``<= 0``, decreasing weights ``>= 0``, and the
    difference vanishes on capillary Wulff shapes or for constant weights.
    """
    case = as_case(target)
    cap = case.build(policy.level)
    weight.verify_monotonicity(cap.fields.support)
    terms, _ = _minkowski_terms(cap, weight, k)
    difference = terms.lhs / terms.scale
    if cap.is_wulff or weight.tag == "constant":
        expectation = "equality"
        tolerance = policy.tolerances.equality
        ok = abs(difference) <= tolerance
    else:
        tolerance = policy.strict_margin
        if weight.sign() > 0:
            expectation = "<= 0 (strict)"
            ok = difference <= -tolerance
        else:
            expectation = ">= 0 (strict)"
            ok = difference >= tolerance
    return CheckReport(
        "corollary-inequalities",
        case.label,
        _verdict(ok),
        abs(difference),
        tolerance,
        integrate(cap.surface, weight(cap.fields.support) * cap.curvature.H(k) * cap.fields.denominator),
        integrate(cap.surface, weight(cap.fields.support) * cap.curvature.H(k + 1) * cap.fields.pairing),
        cap.describe(),
        {"k": k},
        weight.name,
        details={"relative_difference": difference, "expectation": expectation, "tag": weight.tag},
    )


# ---------------------------------------------------------------------------
# Boundary behaviour
# ---------------------------------------------------------------------------
def check_boundary_lemmas(
    target: SurfaceCase | CapillarySurface, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """``S_F`` keeps the boundary tangent space, and ``xi``, ``P_k xi`` are tangent to the boundary."""
    case = as_case(target)
    cap = case.build(policy.level)
    trace = cap.surface.boundary
    if trace is None:
        raise DomainError("boundary checks need a surface with boundary")
    geom = trace.geometry
    curv, fields = cap.boundary_curvature, cap.boundary_fields
    assert curv is not None and fields is not None
    mu = trace.conormal
    n = cap.dim

    curvature_scale = max(1.0, float(np.max(np.abs(curv.kappa))))
    if n >= 2:
        tangent = trace.tangents[:, :, 0]
        image = geom.from_frame(np.einsum("mab,mb->ma", curv.s_f, geom.to_frame(tangent)))
        s_f_leak = float(np.max(np.abs(np.einsum("mi,mi->m", image, mu)))) / curvature_scale
    else:
        s_f_leak = 0.0

    xi_scale = max(1.0, float(np.max(np.linalg.norm(geom.position, axis=-1) * fields.norm_value)))
    xi_leak = float(np.max(np.abs(np.einsum("mi,mi->m", fields.xi, mu)))) / xi_scale
    newton_leak = 0.0
    for k in range(n + 1):
        image = geom.from_frame(curv.apply_newton(k, fields.xi_frame))
        op_scale = max(1.0, float(np.max(np.abs(curv.newton[:, k]))))
        newton_leak = max(newton_leak, float(np.max(np.abs(np.einsum("mi,mi->m", image, mu)))) / (xi_scale * op_scale))

    up = np.zeros(cap.surface.ambient_dim)
    up[-1] = 1.0
    transversality = float(np.min(np.abs(mu @ up)))
    contact = boundary_condition_residual(cap)
    height = float(np.max(np.abs(geom.position[:, -1])))
    worst = max(s_f_leak, xi_leak, newton_leak, contact, height)
    tolerance = policy.tolerances.boundary
    return CheckReport(
        "boundary-lemmas",
        case.label,
        _verdict(worst <= tolerance and transversality > 0.0),
        worst,
        tolerance,
        surface=cap.describe(),
        details={
            "s_f_conormal": s_f_leak,
            "xi_conormal": xi_leak,
            "newton_conormal": newton_leak,
            "contact_angle": contact,
            "boundary_height": height,
            "min_conormal_vertical": transversality,
            "boundary_nodes": cap.surface.mesh.boundary_count,
        },
    )


# ---------------------------------------------------------------------------
# Pointwise finite-difference identities
# ---------------------------------------------------------------------------
def _sampled_fields(cap: CapillarySurface, params: np.ndarray):
    geom = cap.surface.sample(params, check_quality=False)
    return geom, curvature_field(geom, cap.norm), capillary_fields(geom, cap.context)


def _divergence_level(cap: CapillarySurface, k: int, delta: float) -> tuple[float, float, float]:
    """(pointwise relative error, integrated lhs, integrated rhs) at one level."""
    n = cap.dim
    geom, curv, fields = cap.surface.nodes, cap.curvature, cap.fields
    c = (n - k) * binomials(n)[k]

    def newton_xi(params: np.ndarray) -> np.ndarray:
        g, cf, ff = _sampled_fields(cap, params)
        return g.from_frame(cf.apply_newton(k, ff.xi_frame))

    numeric = surface_divergence(geom, newton_xi, delta)
    part_a = c * fields.denominator * curv.H(k)
    part_b = c * fields.pairing * curv.H(k + 1)
    exact = part_a - part_b
    scale = max(float(np.max(np.abs(part_a))), float(np.max(np.abs(part_b))), 1e-300)
    pointwise = float(np.max(np.abs(numeric - exact))) / scale

    interior = integrate(cap.surface, exact)
    flux = 0.0
    if cap.surface.boundary is not None:
        bgeom = cap.surface.boundary.geometry
        bcurv, bfields = cap.boundary_curvature, cap.boundary_fields
        image = bgeom.from_frame(bcurv.apply_newton(k, bfields.xi_frame))
        flux = boundary_integrate(cap.surface, np.einsum("mi,mi->m", image, cap.surface.boundary.conormal))
    return pointwise, interior, flux


def check_divergence_identity(
    target: SurfaceCase | CapillarySurface,
    k: int | None = None,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
) -> CheckReport:
    """``div P_k xi = (n-k) C(n,k) (D H_k - <X,nu> H_{k+1})`` pointwise, and integrated against the boundary flux."""
    case = as_case(target)
    ladder: list[LadderLevel] = []
    integrated = 0.0
    cap = None
    for level in policy.levels:
        cap = case.build(level)
        ks = range(cap.dim) if k is None else [k]
        for index in ks:
            _check_index(cap, index)
        delta = fd_step(cap.surface, policy.fd_scale)
        worst_point, worst_int, lhs_total, rhs_total = 0.0, 0.0, 0.0, 0.0
        n = cap.dim
        for index in ks:
            pointwise, interior, flux = _divergence_level(cap, index, delta)
            c = (n - index) * binomials(n)[index]
            magnitude = integrate(
                cap.surface,
                c * (np.abs(cap.fields.denominator * cap.curvature.H(index)) + np.abs(cap.fields.pairing * cap.curvature.H(index + 1))),
            )
            worst_point = max(worst_point, pointwise)
            worst_int = max(worst_int, abs(interior - flux) / magnitude)
            lhs_total += interior
            rhs_total += flux
        ladder.append(LadderLevel(level, cap.surface.node_count, lhs_total, rhs_total, worst_point))
        integrated = worst_int
    assert cap is not None
    fit = _fit(ladder, policy)
    tolerance = policy.tolerances.identity
    ok = integrated <= tolerance and (fit is None or fit.meets(FD_MIN_ORDER))
    return CheckReport(
        "divergence-identity",
        case.label,
        _verdict(ok),
        ladder[-1].residual,
        tolerance,
        ladder[-1].lhs,
        ladder[-1].rhs,
        cap.describe(),
        {"k": "all" if k is None else k},
        ladder=ladder,
        fit=fit,
        details={"integrated_residual": integrated, "min_order": FD_MIN_ORDER},
    )


def check_gradient_identity(
    target: SurfaceCase | CapillarySurface, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """``grad u_bar = D^-2 dnu(xi)`` against central differences of ``u_bar``."""
    case = as_case(target)
    ladder: list[LadderLevel] = []
    cap = None
    for level in policy.levels:
        cap = case.build(level)
        geom = cap.surface.nodes
        analytic = support_gradient(geom, cap.fields)

        def support_at(params: np.ndarray, cap: CapillarySurface = cap) -> np.ndarray:
            return _sampled_fields(cap, params)[2].support

        numeric = surface_gradient(geom, support_at, fd_step(cap.surface, policy.fd_scale))
        error = float(np.max(np.abs(numeric - analytic))) / max(1.0, float(np.max(np.abs(analytic))))
        ladder.append(
            LadderLevel(
                level,
                cap.surface.node_count,
                float(np.max(np.linalg.norm(numeric, axis=-1))),
                float(np.max(np.linalg.norm(analytic, axis=-1))),
                error,
            )
        )
    assert cap is not None
    fit = _fit(ladder, policy)
    ok = fit is None or fit.meets(FD_MIN_ORDER)
    return CheckReport(
        "gradient-identity",
        case.label,
        _verdict(ok),
        ladder[-1].residual,
        None,
        ladder[-1].lhs,
        ladder[-1].rhs,
        cap.describe(),
        ladder=ladder,
        fit=fit,
        details={"min_order": FD_MIN_ORDER},
    )


# ---------------------------------------------------------------------------
# Inequalities and rigidity
# ---------------------------------------------------------------------------
def check_heintze_karcher(
    target: SurfaceCase | CapillarySurface,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
    ladder: bool = False,
) -> CheckReport:
    """``int D / H_1 >= int <X, nu>``, with equality exactly on capillary Wulff shapes."""
    case = as_case(target)

    def evaluate(cap: CapillarySurface) -> Terms:
        mean_curvature = cap.curvature.H(1)
        if np.min(mean_curvature) <= 0.0:
            raise DomainError("Heintze-Karcher needs H_1 > 0 at every node")
        lhs = integrate(cap.surface, cap.fields.denominator / mean_curvature)
        rhs = integrate(cap.surface, cap.fields.pairing)
        return Terms(lhs, rhs, abs(rhs))

    ladder_levels, terms, cap, estimate = _ladder_run(case, _levels(case, policy, ladder), evaluate)
    gap = (terms.lhs - terms.rhs) / terms.scale
    volume = enclosed_volume(cap.surface)
    if cap.is_wulff:
        tolerance = policy.identity_threshold(estimate)
        ok = abs(gap) <= tolerance
    else:
        tolerance = policy.strict_margin
        ok = gap >= tolerance
    return CheckReport(
        "heintze-karcher",
        case.label,
        _verdict(ok),
        abs(gap),
        tolerance,
        terms.lhs,
        terms.rhs,
        cap.describe(),
        ladder=ladder_levels,
        fit=_fit(ladder_levels, policy) if cap.is_wulff else None,
        details={
            "relative_gap": gap,
            "enclosed_volume": volume,
            "volume_mismatch": abs(terms.rhs - (cap.dim + 1) * volume) / terms.scale,
        },
    )


RELATION_KINDS = {
    "linear-combination": {"a": ("constant", "increasing"), "b": ("constant", "decreasing")},
    "linear-combination-constant": {"a": ("constant", "increasing"), "b": ("constant",)},
    "power-bounds": {"c": ("constant", "decreasing")},
    "ratio-bounds": {"c": ("constant", "increasing")},
    "mixed-products": {"b": ("constant", "increasing"), "c": ("constant", "increasing"), "eta": ("constant", "decreasing")},
    "soliton": {"a": ("constant",)},
}


@dataclass(frozen=True)
class RelationSpec:
    """A curvature relation with coefficient functions fitted on the Wulff shape of radius ``r0``.

    ``tags`` overrides the monotonicity class of a coefficient function; only
    classes under which the rigidity statement applies are accepted.
    """

    kind: str
    index: int | None = None
    tags: Mapping[str, str] = field(default_factory=dict)
    beta: float = 1.0

    def validate(self, n: int) -> int:
        if self.kind not in RELATION_KINDS:
            raise DomainError(f"unknown relation kind {self.kind!r} ({', '.join(RELATION_KINDS)})")
        allowed = RELATION_KINDS[self.kind]
        for role, tag in self.tags.items():
            if role not in allowed:
                raise DomainError(f"relation {self.kind} has no coefficient {role!r}")
            if tag not in allowed[role]:
                raise DomainError(
                    f"coefficient {role!r} of {self.kind} must be {' or '.join(allowed[role])}, not {tag!r}"
                )
        if not self.beta > 0:
            raise DomainError("soliton constant beta must be positive")
        index = n if self.index is None else int(self.index)
        lowest = 2 if self.kind in ("linear-combination", "power-bounds", "ratio-bounds") else 1
        if not lowest <= index <= n:
            raise DomainError(f"relation {self.kind} needs an index in {lowest}..{n}, got {index}")
        return index


def relation_violation(cap: CapillarySurface, spec: RelationSpec) -> tuple[np.ndarray, dict[str, Any]]:
    """Per-node relative violation of ``spec`` with constants taken from the Wulff shape."""
    n = cap.dim
    index = spec.validate(n)
    r0 = cap.radius
    mean = cap.curvature.mean
    u = cap.fields.support
    positive = np.maximum(mean, 0.0)
    if spec.kind == "linear-combination":
        lam = 1.0 / r0
        violation = np.abs(mean[:, index] - lam * mean[:, index - 1]) * r0**index
        constants = {"a": {index: 1.0}, "b": {index - 1: lam}}
    elif spec.kind == "linear-combination-constant":
        b0 = r0**-index
        violation = np.abs(mean[:, index] - b0) / b0
        constants = {"a": {index: 1.0}, "b0": b0}
    elif spec.kind == "power-bounds":
        c = 1.0 / r0
        upper = positive[:, index - 1] ** (1.0 / (index - 1))
        lower = positive[:, index] ** (1.0 / index)
        violation = np.maximum.reduce([np.zeros_like(u), c - upper, lower - c]) / c
        constants = {"c": c}
    elif spec.kind == "ratio-bounds":
        c = r0
        upper = mean[:, index - 1] / mean[:, index]
        lower = mean[:, index - 2] / mean[:, index - 1]
        violation = np.maximum.reduce([np.zeros_like(u), c - upper, lower - c]) / c
        constants = {"c": c}
    elif spec.kind == "mixed-products":
        js = np.arange(1, index + 1)
        eta = float(np.sum(2.0 * r0**-js))
        lhs = np.sum(mean[:, js] + mean[:, [1]] * mean[:, js - 1], axis=1)
        violation = np.abs(lhs - eta) / eta
        constants = {"b": 1.0, "c": 1.0, "eta": eta}
    else:
        pairs = [(i, j) for j in range(1, index + 1) for i in range(j)]
        weight = 1.0 / len(pairs)
        lhs = sum(weight * (positive[:, i] / positive[:, j]) ** (1.0 / (j - i)) for i, j in pairs)
        violation = np.abs(lhs - spec.beta * u) / (spec.beta * np.abs(u))
        constants = {"a": weight, "pairs": len(pairs), "beta": spec.beta}
    return violation, {"index": index, "constants": constants}


def check_rigidity_relations(
    target: SurfaceCase | CapillarySurface,
    spec: RelationSpec,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
) -> CheckReport:
    """On Wulff shapes the relation holds; elsewhere the report carries the witness violation."""
    case = as_case(target)
    cap = case.build(policy.level)
    violation, info = relation_violation(cap, spec)
    worst = float(np.max(violation))
    if cap.is_wulff:
        tolerance = policy.tolerances.boundary
        ok = worst <= tolerance
        expectation = "holds"
    else:
        tolerance = policy.strict_margin
        ok = worst >= tolerance
        expectation = "violated"
    return CheckReport(
        "rigidity-relations",
        case.label,
        _verdict(ok),
        worst,
        tolerance,
        surface=cap.describe(),
        indices={"kind": spec.kind, "index": info["index"]},
        details={
            "expectation": expectation,
            "constants": info["constants"],
            "violating_nodes": int(np.count_nonzero(violation > policy.tolerances.boundary)),
            "tags": dict(spec.tags),
        },
    )


def check_support_constancy(
    target: SurfaceCase | CapillarySurface, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """``u_bar`` is constant on capillary Wulff shapes and visibly not constant on perturbations."""
    case = as_case(target)
    cap = case.build(policy.level)
    stats = capillary_support(cap)
    spread = stats.relative_spread
    if cap.is_wulff:
        tolerance = policy.tolerances.boundary
        ok = spread <= tolerance and abs(stats.mean - cap.radius) <= tolerance * cap.radius
    else:
        tolerance = policy.strict_margin
        ok = spread >= tolerance
    return CheckReport(
        "support-constancy",
        case.label,
        _verdict(ok),
        spread,
        tolerance,
        surface=cap.describe(),
        details={**stats.to_payload(), "witness_threshold": SPREAD_WITNESS, "meets_witness": spread >= SPREAD_WITNESS},
    )


# ---------------------------------------------------------------------------
# Closed-surface identities and kernel invariants
# ---------------------------------------------------------------------------
def check_newton_divergence(
    target: SurfaceCase | CapillarySurface, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """Divergences of ``P_k grad^S F(nu)`` and ``P_k X^T`` on closed surfaces, pointwise and integrated."""
    case = as_case(target)
    ladder: list[LadderLevel] = []
    integrated = 0.0
    cap = None
    for level in policy.levels:
        cap = case.build(level)
        if cap.surface.boundary is not None:
            raise DomainError("the Newton divergence identities are checked on closed surfaces")
        n = cap.dim
        geom, curv, fields = cap.surface.nodes, cap.curvature, cap.fields
        delta = fd_step(cap.surface, policy.fd_scale)
        worst_point, worst_int = 0.0, 0.0
        for k in range(n):
            trace = np.trace(curv.newton[:, k] @ geom.shape, axis1=-2, axis2=-1)

            def gradient_field(params: np.ndarray, k: int = k) -> np.ndarray:
                g, cf, ff = _sampled_fields(cap, params)
                tangent = g.to_frame(ff.cahn_hoffman - ff.norm_value[:, None] * g.normal)
                return g.from_frame(cf.apply_newton(k, tangent))

            def position_field(params: np.ndarray, k: int = k) -> np.ndarray:
                g, cf, _ = _sampled_fields(cap, params)
                return g.from_frame(cf.apply_newton(k, g.to_frame(g.position)))

            rhs_one = (k + 1) * curv.sigma[:, k + 1] - fields.norm_value * trace
            rhs_two = (n - k) * curv.sigma[:, k] - fields.pairing * trace
            for vector_field, exact, parts in (
                (gradient_field, rhs_one, ((k + 1) * curv.sigma[:, k + 1], fields.norm_value * trace)),
                (position_field, rhs_two, ((n - k) * curv.sigma[:, k], fields.pairing * trace)),
            ):
                numeric = surface_divergence(geom, vector_field, delta)
                scale = max(float(np.max(np.abs(parts[0]))), float(np.max(np.abs(parts[1]))))
                worst_point = max(worst_point, float(np.max(np.abs(numeric - exact))) / scale)
                magnitude = integrate(cap.surface, np.abs(parts[0]) + np.abs(parts[1]))
                worst_int = max(worst_int, abs(integrate(cap.surface, exact)) / magnitude)
        ladder.append(LadderLevel(level, cap.surface.node_count, 0.0, 0.0, worst_point))
        integrated = worst_int
    assert cap is not None
    fit = _fit(ladder, policy)
    tolerance = policy.tolerances.identity
    ok = integrated <= tolerance and (fit is None or fit.meets(FD_MIN_ORDER))
    return CheckReport(
        "newton-divergence",
        case.label,
        _verdict(ok),
        ladder[-1].residual,
        tolerance,
        surface=cap.describe(),
        ladder=ladder,
        fit=fit,
        details={"integrated_residual": integrated, "min_order": FD_MIN_ORDER},
    )


def check_isotropic_minkowski(
    target: SurfaceCase | CapillarySurface,
    weight: WeightFunction,
    k: int,
    *,
    policy: TolerancePolicy = TolerancePolicy(),
) -> CheckReport:
    """Classical weighted Minkowski formula with the Euclidean Newton tensor ``T_k``."""
    case = as_case(target)
    cap = case.build(policy.level)
    if cap.surface.boundary is not None:
        raise DomainError("the classical Minkowski formula is checked on closed surfaces")
    _check_index(cap, k)
    geom = cap.surface.nodes
    n = cap.dim
    kappa = np.linalg.eigvalsh(geom.shape)
    sigma, mean = symmetric_functions(kappa)
    tensors = newton_operators(geom.shape, sigma)
    pairing = np.einsum("mi,mi->m", geom.position, geom.normal)
    tangent_x = geom.to_frame(geom.position)
    f = weight(pairing)
    grad_f = weight.derivative(pairing)[:, None] * np.einsum("mab,mb->ma", geom.shape, tangent_x)
    c = (n - k) * binomials(n)[k]
    h_next = mean[:, k + 1] if k + 1 <= n else np.zeros(len(f))
    mixed = np.einsum("ma,ma->m", np.einsum("mab,mb->ma", tensors[:, k], grad_f), tangent_x)
    lhs = integrate(cap.surface, f * mean[:, k])
    rhs = integrate(cap.surface, f * h_next * pairing) - integrate(cap.surface, mixed) / c
    scale = (
        integrate(cap.surface, np.abs(f * mean[:, k]))
        + integrate(cap.surface, np.abs(f * h_next * pairing))
        + integrate(cap.surface, np.abs(mixed)) / c
    )
    residual = abs(lhs - rhs) / scale
    tolerance = policy.tolerances.identity
    return CheckReport(
        "isotropic-minkowski",
        case.label,
        _verdict(residual <= tolerance),
        residual,
        tolerance,
        lhs,
        rhs,
        cap.describe(),
        {"k": k},
        weight.name,
    )


def check_curvature_invariants(
    target: SurfaceCase | CapillarySurface, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """``P_n = 0``, trace/determinant agreement, and ``kappa^F = 1/r0`` on Wulff shapes."""
    case = as_case(target)
    cap = case.build(policy.level)
    curv = cap.curvature
    n = cap.dim
    scale = max(1.0, float(np.max(np.abs(curv.kappa)))) ** n
    cayley = float(np.max(np.abs(curv.newton[:, n]))) / scale
    details: dict[str, Any] = {
        "cayley_hamilton": cayley,
        "trace_determinant": curv.trace_residual,
        "frame": cap.surface.invariant_residuals(),
        "kappa_range": [float(np.min(curv.kappa)), float(np.max(curv.kappa))],
    }
    worst = max(cayley, curv.trace_residual)
    if cap.is_wulff:
        umbilic = float(np.max(np.abs(curv.kappa * cap.radius - 1.0)))
        details["wulff_curvature"] = umbilic
        worst = max(worst, umbilic)
    frame_worst = max(v for key, v in details["frame"].items() if key != "max_asymmetry")
    tolerance = policy.tolerances.pointwise
    return CheckReport(
        "curvature-invariants",
        case.label,
        _verdict(worst <= tolerance and frame_worst <= 1e-10),
        worst,
        tolerance,
        surface=cap.describe(),
        details=details,
    )


def check_cap_area(
    target: SurfaceCase | CapillarySurface, theta: float, *, policy: TolerancePolicy = TolerancePolicy()
) -> CheckReport:
    """Area and boundary measure of a round cap of angle ``theta`` against closed forms."""
    case = as_case(target)
    ladder: list[LadderLevel] = []
    cap = None
    for level in policy.levels:
        cap = case.build(level)
        r0 = cap.radius
        if cap.dim == 2:
            exact_area, exact_boundary = 2.0 * math.pi * r0**2 * (1.0 - math.cos(theta)), 2.0 * math.pi * r0 * math.sin(theta)
        else:
            exact_area, exact_boundary = 2.0 * theta * r0, 2.0
        area = cap.surface.total_area
        boundary = boundary_integrate(cap.surface, 1.0)
        error = max(abs(area - exact_area) / exact_area, abs(boundary - exact_boundary) / exact_boundary)
        ladder.append(LadderLevel(level, cap.surface.node_count, area, exact_area, error))
    assert cap is not None
    fit = _fit(ladder, policy)
    tolerance = policy.tolerances.identity
    ok = ladder[-1].residual <= tolerance and (fit is None or fit.meets(QUADRATURE_MIN_ORDER))
    return CheckReport(
        "quadrature-area",
        case.label,
        _verdict(ok),
        ladder[-1].residual,
        tolerance,
        ladder[-1].lhs,
        ladder[-1].rhs,
        cap.describe(),
        {"theta": theta},
        ladder=ladder,
        fit=fit,
    )


# ---------------------------------------------------------------------------
# Norm, algebra and solver checks
# ---------------------------------------------------------------------------
def _numeric_twin(norm: MinkowskiNorm, step: float) -> MinkowskiNorm:
    return replace(norm, derivative_mode="numeric", step=step, validate=False)


def difference_roundoff(norm: MinkowskiNorm, samples: np.ndarray, step: float) -> float:
    """Cancellation level of a second difference of ``F`` with spacing ``step``.

    Below it a numeric ``A_F`` error is noise, so a ladder that never rises
    above it counts as exact.
    """
    scale = float(np.max(np.abs(norm.value(samples))))
    return ROUNDOFF_FACTOR * np.finfo(float).eps * scale / step**2


def check_norm(norm: MinkowskiNorm, label: str, *, policy: TolerancePolicy = TolerancePolicy()) -> CheckReport:
    """Duality, homogeneity, Cauchy-Schwarz, Wulff membership and derivative convergence for one norm."""
    rng = np.random.default_rng(policy.seed)
    samples = random_unit_vectors(norm.dim_ambient, 32, rng)
    duality = max(abs(dual_norm(norm, v) - 1.0) for v in cahn_hoffman(norm, samples))
    homogeneity = check_homogeneity(norm, seed=policy.seed)
    dual_homogeneity = check_dual_homogeneity(norm, samples=20, seed=policy.seed)
    schwarz = cauchy_schwarz_sweep(norm, samples=50, seed=policy.seed)
    wulff_points(WulffShapeSpec(norm, 1.5), 64, seed=policy.seed)
    details: dict[str, Any] = {
        "duality": duality,
        "homogeneity": homogeneity,
        "dual_homogeneity": dual_homogeneity,
        "cauchy_schwarz": schwarz,
    }
    ok = duality <= 1e-8 and homogeneity <= 1e-10 and dual_homogeneity <= 1e-8 and schwarz <= 1e-10
    fit = None
    if norm.derivative_mode == "analytic" and norm.family != "custom":
        exact = norm.a_f(samples)
        steps = [1e-2, 5e-3, 2.5e-3]
        errors = [float(np.max(np.abs(_numeric_twin(norm, h).a_f(samples) - exact))) for h in steps]
        fit = convergence_fit(errors, None, steps, floor=difference_roundoff(norm, samples, min(steps)))
        details["numeric_derivative_errors"] = errors
        ok = ok and fit.meets(QUADRATURE_MIN_ORDER)
    return CheckReport(
        "norm-duality",
        label,
        _verdict(ok),
        max(duality, homogeneity, schwarz),
        1e-8,
        surface={"norm": norm.describe()},
        fit=fit,
        details=details,
    )


def check_algebra(kind: str, samples: int, *, policy: TolerancePolicy = TolerancePolicy()) -> CheckReport:
    if kind == "newton-maclaurin":
        sweep = newton_maclaurin_sweep(samples, seed=policy.seed)
    elif kind == "coefficient-inequality":
        sweep = coefficient_inequality_sweep(samples, seed=policy.seed)
    else:
        raise DomainError(f"unknown algebraic check {kind!r}")
    return CheckReport(
        kind,
        f"{samples} random instances",
        _verdict(sweep.passed),
        float(sweep.violations),
        0.0,
        details=sweep.to_payload(),
    )


def check_solver_convergence(
    theta: float, p: float, profile: str = "bumped", grids: Sequence[int] = (64, 128, 256), **options: Any
) -> CheckReport:
    study = self_convergence(manufactured_profile(profile, theta), p, grids, **options)
    ok = study.fit.meets(QUADRATURE_MIN_ORDER)
    return CheckReport(
        "minkowski-convergence",
        f"{profile} theta={theta:.4g} p={p:g}",
        _verdict(ok),
        study.errors[-1],
        None,
        indices={"p": p, "theta": theta},
        fit=study.fit,
        details=study.to_payload(),
    )


def check_solver_uniqueness(
    theta: float, p: float, *, starts: int = 20, grid: int = 256, profile: str = "bumped", seed: int = DEFAULT_SEED, **options: Any
) -> CheckReport:
    """Multi-start clustering; ``p = 1`` uses constant data so the unique solution is a circular arc."""
    if math.isclose(p, 1.0):
        bvp = CapillaryBVP.from_function(theta, p, 1.0, grid, **options)
    else:
        bvp = CapillaryBVP.manufactured(manufactured_profile(profile, theta), p, grid, **options)
    report = uniqueness_experiment(bvp, starts, seed=seed)
    covariance = scaling_covariance(bvp, 2.0)
    ok = report.passed and covariance <= 1e-8
    return CheckReport(
        "minkowski-uniqueness",
        f"theta={theta:.4g} p={p:g}",
        _verdict(ok),
        report.normalized_diameter if bvp.gauge == "scaling" else report.diameter,
        1e-8,
        indices={"p": p, "theta": theta},
        details={**report.to_payload(), "scaling_covariance": covariance},
    )
