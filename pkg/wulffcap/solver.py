"""Finite-difference Newton solver for the planar capillary L_p Minkowski problem.

For n = 1 the support function ``u(t)`` of a capillary convex curve, written
over normals ``(sin t, cos t)`` with ``t in [-theta, theta]``, satisfies

    (u'' + u) u^{1-p} = phi        with   u'(+-theta) = +-cot(theta) u(+-theta).

The interior equation is discretised with the three-point second difference
and the Robin conditions with one-sided second-order stencils, so every
solution converges at second order.  Two exponents need a gauge:

* ``p = 2`` (= n + 1) is scale invariant: the right-hand side carries a
  multiplier ``lambda`` and ``u(0)`` is pinned;
* ``p = 1`` is invariant under horizontal translation ``u -> u + a sin t``:
  the equation carries a multiplier ``a`` and the sine moment is pinned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import CurvatureError, DomainError, NonConvergenceError
from .logging import get_logger
from .quadrature import ConvergenceFit, convergence_fit

LOG = get_logger(__name__)

ARMIJO = 1e-4
CLUSTER_TOLERANCE = 1e-8
PROFILE_AMPLITUDES = {"bump": 0.1, "tilt": 0.2}


# ---------------------------------------------------------------------------
# Manufactured profiles
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ManufacturedProfile:
    """Closed-form support function satisfying the Robin conditions exactly."""

    name: str
    theta: float
    radius: float
    u: Callable[[np.ndarray], np.ndarray]
    d2u: Callable[[np.ndarray], np.ndarray]

    def curvature_radius(self, t: np.ndarray) -> np.ndarray:
        return self.d2u(t) + self.u(t)


def manufactured_profile(name: str, theta: float, radius: float = 1.0) -> ManufacturedProfile:
    """``cap``: circular arc; ``bumped``: plus a ``cos 2t`` mode; ``tilted``: plus a translation."""
    c = math.cos(theta)
    bump_shift = 1.0 + 2.0 * math.sin(theta) ** 2
    bump = PROFILE_AMPLITUDES["bump"] * radius
    tilt = PROFILE_AMPLITUDES["tilt"] * radius

    def cap(t: np.ndarray) -> np.ndarray:
        return radius * (1.0 - c * np.cos(t))

    def cap_d2(t: np.ndarray) -> np.ndarray:
        return radius * c * np.cos(t)

    def bumped(t: np.ndarray) -> np.ndarray:
        return cap(t) + bump * (np.cos(2.0 * t) - bump_shift)

    def bumped_d2(t: np.ndarray) -> np.ndarray:
        return cap_d2(t) - 4.0 * bump * np.cos(2.0 * t)

    if name == "cap":
        return ManufacturedProfile(name, theta, radius, cap, cap_d2)
    if name == "bumped":
        return ManufacturedProfile(name, theta, radius, bumped, bumped_d2)
    if name == "tilted":
        return ManufacturedProfile(
            name,
            theta,
            radius,
            lambda t: bumped(t) + tilt * np.sin(t),
            lambda t: bumped_d2(t) - tilt * np.sin(t),
        )
    raise DomainError(f"unknown manufactured profile {name!r} (cap, bumped, tilted)")


def grid_nodes(theta: float, grid: int) -> np.ndarray:
    return np.linspace(-theta, theta, grid + 1)


def _second_difference(u: np.ndarray, h: float) -> np.ndarray:
    """Three-point interior stencil, four-point one-sided stencils at the ends."""
    d2 = np.empty_like(u)
    d2[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    d2[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h**2
    d2[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / h**2
    return d2


def _robin_rows(u: np.ndarray, h: float, cot: float) -> tuple[float, float]:
    left = (3.0 * u[0] - 4.0 * u[1] + u[2]) / (2.0 * h) - cot * u[0]
    right = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h) - cot * u[-1]
    return left, right


def manufactured_rhs(profile: ManufacturedProfile | np.ndarray, p: float, *, theta: float | None = None, grid: int | None = None) -> np.ndarray:
    """``phi = (u'' + u) u^{1-p}`` on the solver grid.

    Closed-form profiles use their exact second derivative; raw grid
    functions are differenced and must satisfy the discrete Robin closures.
    """
    if isinstance(profile, ManufacturedProfile):
        if grid is None:
            raise DomainError("grid size is required for closed-form profiles")
        t = grid_nodes(profile.theta, grid)
        u, radius_of_curvature = profile.u(t), profile.curvature_radius(t)
    else:
        u = np.asarray(profile, dtype=float)
        if theta is None or u.ndim != 1 or u.size < 5:
            raise DomainError("grid profiles need theta and at least five nodes")
        h = 2.0 * theta / (u.size - 1)
        left, right = _robin_rows(u, h, 1.0 / math.tan(theta))
        if max(abs(left), abs(right)) > 1e-10 * max(1.0, float(np.max(np.abs(u)))):
            raise DomainError("grid profile violates the Robin conditions")
        radius_of_curvature = _second_difference(u, h) + u
    if np.min(u) <= 0.0:
        raise DomainError("manufactured support function must be positive")
    if np.min(radius_of_curvature) <= 0.0:
        raise DomainError("manufactured support function must be strictly convex (u'' + u > 0)")
    return radius_of_curvature * u ** (1.0 - p)


# ---------------------------------------------------------------------------
# Boundary value problem
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CapillaryBVP:
    theta: float
    p: float
    phi: np.ndarray
    # Gauge target: u(0) for p = 2, the discrete sine moment for p = 1.
    anchor: float | None = None
    max_iterations: int = 60
    tolerance: float = 1e-10
    damping_floor: float = 2.0**-10

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < math.pi:
            raise DomainError("capillary angle must lie in (0, pi)")
        if self.p < 1.0:
            raise DomainError(f"exponent p must be >= 1, got {self.p}")
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 1 or phi.size < 9 or (phi.size - 1) % 2:
            raise DomainError("phi must be sampled on an even grid of at least 8 cells")
        if not np.all(np.isfinite(phi)) or np.min(phi) <= 0.0:
            raise DomainError("phi must be finite and positive")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_function(
        cls, theta: float, p: float, phi: Callable[[np.ndarray], Any] | float, grid: int = 256, **options: Any
    ) -> "CapillaryBVP":
        t = grid_nodes(theta, grid)
        values = np.broadcast_to(np.asarray(phi(t) if callable(phi) else phi, dtype=float), t.shape).copy()
        return cls(theta, p, values, **options)

    @classmethod
    def manufactured(
        cls, profile: ManufacturedProfile, p: float, grid: int = 256, **options: Any
    ) -> "CapillaryBVP":
        phi = manufactured_rhs(profile, p, grid=grid)
        if math.isclose(p, 2.0):
            options.setdefault("anchor", float(profile.u(np.zeros(1))[0]))
        elif math.isclose(p, 1.0):
            t = grid_nodes(profile.theta, grid)
            options.setdefault("anchor", float(_trapezoid(2.0 * profile.theta / grid, grid) @ (profile.u(t) * np.sin(t))))
        return cls(profile.theta, p, phi, **options)

    @property
    def grid(self) -> int:
        return self.phi.size - 1

    @property
    def spacing(self) -> float:
        return 2.0 * self.theta / self.grid

    @property
    def nodes(self) -> np.ndarray:
        return grid_nodes(self.theta, self.grid)

    @property
    def gauge(self) -> str:
        if math.isclose(self.p, 2.0):
            return "scaling"
        if math.isclose(self.p, 1.0):
            return "translation"
        return "none"

    def describe(self) -> dict[str, Any]:
        return {"theta": self.theta, "p": self.p, "grid": self.grid, "gauge": self.gauge}


def _trapezoid(h: float, grid: int) -> np.ndarray:
    weights = np.full(grid + 1, h)
    weights[[0, -1]] = 0.5 * h
    return weights


@dataclass(frozen=True)
class SolveResult:
    t: np.ndarray
    u: np.ndarray
    multiplier: float | None
    iterations: int
    residual: float
    convexity: float
    history: tuple[float, ...] = field(default=())

    def max_error(self, exact: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.max(np.abs(self.u - exact(self.t))))

    def to_payload(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "convexity": self.convexity,
            "multiplier": self.multiplier,
            "u_min": float(np.min(self.u)),
            "u_max": float(np.max(self.u)),
        }


class _Discretisation:
    """Residual and Jacobian of the bordered finite-difference system."""

    def __init__(self, bvp: CapillaryBVP, anchor: float) -> None:
        self.bvp = bvp
        self.n = bvp.grid + 1
        self.h = bvp.spacing
        self.cot = 1.0 / math.tan(bvp.theta)
        self.t = bvp.nodes
        self.sin_t = np.sin(self.t)
        self.weights = _trapezoid(self.h, bvp.grid)
        self.mid = bvp.grid // 2
        self.anchor = anchor
        self.bordered = bvp.gauge != "none"

    def split(self, state: np.ndarray) -> tuple[np.ndarray, float]:
        if self.bordered:
            return state[:-1], float(state[-1])
        return state, 0.0

    def curvature(self, u: np.ndarray) -> np.ndarray:
        return (u[2:] - 2.0 * u[1:-1] + u[:-2]) / self.h**2 + u[1:-1]

    def residual(self, state: np.ndarray) -> np.ndarray:
        u, mult = self.split(state)
        p, phi = self.bvp.p, self.bvp.phi
        rows = np.empty(self.n + (1 if self.bordered else 0))
        rows[0], rows[self.n - 1] = _robin_rows(u, self.h, self.cot)
        interior = self.curvature(u) * u[1:-1] ** (1.0 - p)
        if self.bvp.gauge == "translation":
            rows[1 : self.n - 1] = interior - phi[1:-1] - mult * self.sin_t[1:-1]
            rows[-1] = self.weights @ (u * self.sin_t) - self.anchor
        elif self.bvp.gauge == "scaling":
            rows[1 : self.n - 1] = interior - mult * phi[1:-1]
            rows[-1] = u[self.mid] - self.anchor
        else:
            rows[1 : self.n - 1] = interior - phi[1:-1]
        return rows

    def jacobian(self, state: np.ndarray) -> sparse.csc_matrix:
        u, _ = self.split(state)
        p, h, n = self.bvp.p, self.h, self.n
        size = n + (1 if self.bordered else 0)
        idx = np.arange(1, n - 1)
        scale = u[1:-1] ** (1.0 - p)
        diag = (1.0 - 2.0 / h**2) * scale + (1.0 - p) * self.curvature(u) * u[1:-1] ** (-p)
        off = scale / h**2
        rows = [idx, idx, idx]
        cols = [idx - 1, idx, idx + 1]
        vals = [off, diag, off]
        edge = 1.0 / (2.0 * h)
        rows.append(np.array([0, 0, 0, n - 1, n - 1, n - 1]))
        cols.append(np.array([0, 1, 2, n - 1, n - 2, n - 3]))
        vals.append(np.array([3.0 * edge - self.cot, -4.0 * edge, edge, 3.0 * edge - self.cot, -4.0 * edge, edge]))
        if self.bvp.gauge == "translation":
            rows += [idx, np.full(n, n)]
            cols += [np.full(n - 2, n), np.arange(n)]
            vals += [-self.sin_t[1:-1], self.weights * self.sin_t]
        elif self.bvp.gauge == "scaling":
            rows += [idx, np.array([n])]
            cols += [np.full(n - 2, n), np.array([self.mid])]
            vals += [-self.bvp.phi[1:-1], np.array([1.0])]
        matrix = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
        )
        return matrix.tocsc()


def initial_guess(bvp: CapillaryBVP, *, anchor: float | None = None) -> np.ndarray:
    """Circular-arc profile ``c (1 - cos(theta) cos t)`` with ``c`` balancing the mean of ``phi``."""
    shape = 1.0 - math.cos(bvp.theta) * np.cos(bvp.nodes)
    if bvp.gauge == "scaling":
        target = anchor if anchor is not None else (bvp.anchor if bvp.anchor is not None else 1.0)
        return target * shape / shape[bvp.grid // 2]
    mean_phi = float(np.mean(bvp.phi))
    c = (mean_phi * float(np.mean(shape)) ** (bvp.p - 1.0)) ** (1.0 / (2.0 - bvp.p))
    return c * shape


def solve(bvp: CapillaryBVP, initial: np.ndarray | None = None) -> SolveResult:
    """Damped Newton with Armijo backtracking; keeps ``u > 0`` and, once reached, convexity."""
    guess = initial_guess(bvp) if initial is None else np.asarray(initial, dtype=float).copy()
    if guess.shape != (bvp.grid + 1,) or np.min(guess) <= 0.0:
        raise DomainError("initial guess must be positive and sampled on the solver grid")
    if bvp.gauge == "scaling":
        anchor = bvp.anchor if bvp.anchor is not None else float(guess[bvp.grid // 2])
    elif bvp.gauge == "translation":
        anchor = bvp.anchor if bvp.anchor is not None else 0.0
    else:
        anchor = 0.0
    system = _Discretisation(bvp, anchor)
    state = np.concatenate([guess, [1.0 if bvp.gauge == "scaling" else 0.0]]) if system.bordered else guess
    threshold = bvp.tolerance * max(1.0, float(np.max(bvp.phi)))
    history: list[float] = []

    def admissible(candidate: np.ndarray, keep_convex: bool) -> bool:
        u, _ = system.split(candidate)
        if np.min(u) <= 0.0:
            return False
        return not keep_convex or float(np.min(system.curvature(u))) > 0.0

    residual = system.residual(state)
    for iteration in range(bvp.max_iterations + 1):
        worst = float(np.max(np.abs(residual)))
        history.append(worst)
        if worst <= threshold:
            u, mult = system.split(state)
            convexity = float(np.min(system.curvature(u)))
            if convexity <= 0.0:
                raise CurvatureError(f"solver converged to a non-convex profile (min u''+u = {convexity:.3e})")
            LOG.debug("capillary BVP p=%g N=%d converged in %d iterations", bvp.p, bvp.grid, iteration)
            return SolveResult(
                bvp.nodes,
                u.copy(),
                mult if system.bordered else None,
                iteration,
                worst,
                convexity,
                tuple(history),
            )
        if iteration == bvp.max_iterations:
            break
        step = spsolve(system.jacobian(state), -residual)
        if not np.all(np.isfinite(step)):
            raise NonConvergenceError("Newton system is singular", residual=worst, iterations=iteration)
        keep_convex = bool(np.min(system.curvature(system.split(state)[0])) > 0.0)
        norm0 = float(np.linalg.norm(residual))
        alpha = 1.0
        while True:
            trial = state + alpha * step
            if admissible(trial, keep_convex):
                trial_residual = system.residual(trial)
                if np.linalg.norm(trial_residual) <= (1.0 - ARMIJO * alpha) * norm0:
                    break
            alpha *= 0.5
            if alpha < bvp.damping_floor:
                raise NonConvergenceError(
                    f"line search stalled below damping floor {bvp.damping_floor:g}",
                    residual=worst,
                    iterations=iteration,
                )
        state, residual = trial, trial_residual
    raise NonConvergenceError(
        f"no convergence within {bvp.max_iterations} Newton iterations",
        residual=history[-1],
        iterations=bvp.max_iterations,
    )


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class UniquenessReport:
    p: float
    starts: int
    converged: int
    diameter: float
    normalized_diameter: float
    ratio_spread: float
    verdict: str
    multipliers: tuple[float, ...] = ()
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict in ("unique", "scaling-family")

    def to_payload(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "starts": self.starts,
            "converged": self.converged,
            "diameter": self.diameter,
            "normalized_diameter": self.normalized_diameter,
            "ratio_spread": self.ratio_spread,
            "verdict": self.verdict,
            "multipliers": list(self.multipliers),
            "failures": list(self.failures),
        }


def _diameter(profiles: Sequence[np.ndarray]) -> float:
    if len(profiles) < 2:
        return 0.0
    stack = np.stack(profiles)
    spread = float(np.max(np.max(stack, axis=0) - np.min(stack, axis=0)))
    return spread / max(1.0, float(np.max(np.abs(stack))))


def random_starts(bvp: CapillaryBVP, count: int, *, seed: int) -> list[np.ndarray]:
    """Log-uniform amplitudes in ``[0.1, 10]`` times smooth low-mode distortions."""
    rng = np.random.default_rng(seed)
    base = initial_guess(bvp)
    t = bvp.nodes
    starts = []
    for _ in range(count):
        amplitude = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        cos_coeffs, sin_coeffs = rng.standard_normal(2), rng.standard_normal(2)
        modes = sum(cos_coeffs[k] * np.cos((k + 1) * t) + sin_coeffs[k] * np.sin((k + 1) * t) for k in range(2))
        starts.append(amplitude * base * np.exp(0.1 * modes))
    return starts


def uniqueness_experiment(bvp: CapillaryBVP, n_starts: int = 20, *, seed: int = 0) -> UniquenessReport:
    solutions: list[SolveResult] = []
    failures: list[str] = []
    for index, start in enumerate(random_starts(bvp, n_starts, seed=seed)):
        problem = replace(bvp, anchor=None) if bvp.gauge == "scaling" else bvp
        try:
            solutions.append(solve(problem, start))
        except (NonConvergenceError, CurvatureError) as exc:
            LOG.info("start %d did not converge: %s", index, exc)
            failures.append(f"{index}: {exc}")
    profiles = [s.u for s in solutions]
    mid = bvp.grid // 2
    diameter = _diameter(profiles)
    normalized = _diameter([u / u[mid] for u in profiles])
    ratio_spread = 0.0
    if len(profiles) >= 2:
        ratios = [u / profiles[0] for u in profiles[1:]]
        ratio_spread = max(float(np.std(r) / np.mean(r)) for r in ratios)
    if len(profiles) < 2:
        verdict = "inconclusive"
    elif bvp.gauge == "scaling":
        verdict = "scaling-family" if normalized <= CLUSTER_TOLERANCE and ratio_spread <= CLUSTER_TOLERANCE else "non-unique"
    else:
        verdict = "unique" if diameter <= CLUSTER_TOLERANCE else "non-unique"
    LOG.info(
        "uniqueness p=%g: %d/%d converged, diameter %.2e, normalised %.2e -> %s",
        bvp.p,
        len(profiles),
        n_starts,
        diameter,
        normalized,
        verdict,
    )
    return UniquenessReport(
        bvp.p,
        n_starts,
        len(profiles),
        diameter,
        normalized,
        ratio_spread,
        verdict,
        tuple(float(s.multiplier) for s in solutions if s.multiplier is not None),
        tuple(failures),
    )


def scaling_covariance(bvp: CapillaryBVP, factor: float) -> float:
    """Relative deviation of ``u_c`` from ``c u`` where ``u_c`` solves the problem with ``c^{2-p} phi``."""
    if not factor > 0:
        raise DomainError("scaling factor must be positive")
    base = solve(bvp)
    if bvp.gauge == "scaling":
        scaled_bvp = replace(bvp, anchor=factor * float(base.u[bvp.grid // 2]))
    else:
        anchor = None if bvp.anchor is None else factor * bvp.anchor
        scaled_bvp = replace(bvp, phi=bvp.phi * factor ** (2.0 - bvp.p), anchor=anchor)
    scaled = solve(scaled_bvp)
    return float(np.max(np.abs(scaled.u - factor * base.u)) / (factor * np.max(np.abs(base.u))))


@dataclass(frozen=True)
class ConvergenceStudy:
    grids: tuple[int, ...]
    errors: tuple[float, ...]
    fit: ConvergenceFit
    self_order: float | None

    def to_payload(self) -> dict[str, Any]:
        return {
            "grids": list(self.grids),
            "errors": list(self.errors),
            "order": self.fit.order,
            "exact": self.fit.exact,
            "self_order": self.self_order,
        }


def self_convergence(
    profile: ManufacturedProfile, p: float, grids: Sequence[int] = (64, 128, 256), **options: Any
) -> ConvergenceStudy:
    """Max-node error against the manufactured profile, plus the Richardson self-convergence order."""
    ordered = sorted(int(g) for g in grids)
    results = [solve(CapillaryBVP.manufactured(profile, p, g, **options)) for g in ordered]
    errors = tuple(r.max_error(profile.u) for r in results)
    fit = convergence_fit(errors, None, [2.0 * profile.theta / g for g in ordered], floor=1e-14)
    self_order = None
    if len(results) >= 3 and ordered[-1] == 2 * ordered[-2] == 4 * ordered[-3]:
        coarse, mid, fine = (r.u for r in results[-3:])
        diff_coarse = float(np.max(np.abs(coarse - mid[::2])))
        diff_fine = float(np.max(np.abs(mid - fine[::2])))
        if diff_fine > 0.0:
            self_order = math.log2(diff_coarse / diff_fine)
    LOG.info("self-convergence %s p=%g: errors %s order %s", profile.name, p, errors, fit.label)
    return ConvergenceStudy(tuple(ordered), errors, fit, self_order)
