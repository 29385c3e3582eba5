"""Algebraic inequalities between normalised elementary symmetric functions.

Both checks work on a single curvature vector; the sweeps run them over
seeded random batches and count violations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DomainError
from .logging import get_logger
from .surfaces import symmetric_functions

LOG = get_logger(__name__)

SLACK = 1e-12


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs: float
    holds: bool
    equality: bool
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def _curvatures(kappa: Any) -> np.ndarray:
    values = np.asarray(kappa, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("curvature vector must be one-dimensional and non-empty")
    return values


def in_garding_cone(sigma: np.ndarray, k: int) -> bool:
    """``sigma_i > 0`` for ``1 <= i <= k``."""
    return bool(np.all(sigma[1 : k + 1] > 0.0))


def _all_equal(values: np.ndarray) -> bool:
    return float(np.ptp(values)) <= SLACK * max(1.0, float(np.max(np.abs(values))))


def check_newton_maclaurin(kappa: Any, indices: Sequence[int]) -> InequalityResult:
    """``(H_k/H_l)^{1/(k-l)} <= (H_r/H_s)^{1/(r-s)}`` for ``kappa`` in the k-th Garding cone."""
    values = _curvatures(kappa)
    k, l, r, s = (int(i) for i in indices)
    n = values.size
    if not (k > l >= 0 and r > s >= 0 and k >= r and l >= s and k <= n):
        raise DomainError(f"inadmissible index tuple (k, l, r, s) = {(k, l, r, s)} for n = {n}")
    sigma, mean = symmetric_functions(values)
    if not in_garding_cone(sigma, k):
        raise DomainError(f"curvatures {values.tolist()} are not in the cone Gamma_{k}")
    return _maclaurin(mean, (k, l, r, s), _all_equal(values))


def _maclaurin(mean: np.ndarray, indices: tuple[int, int, int, int], equal: bool) -> InequalityResult:
    k, l, r, s = indices
    lhs = float((mean[k] / mean[l]) ** (1.0 / (k - l)))
    rhs = float((mean[r] / mean[s]) ** (1.0 / (r - s)))
    return InequalityResult(lhs, rhs, lhs <= rhs * (1.0 + SLACK) + SLACK, equal)


def admissible_index_tuples(n: int) -> list[tuple[int, int, int, int]]:
    return [
        (k, l, r, s)
        for k, l, r, s in itertools.product(range(n + 1), repeat=4)
        if k > l >= 0 and r > s >= 0 and k >= r and l >= s
    ]


def check_coefficient_inequality(
    kappa: Any, lower: int, a: Sequence[float], b: Sequence[float]
) -> InequalityResult:
    """If ``sum_{j=l}^{r} a_j H_j = sum_{i<l} b_i H_i`` then
    ``sum a_j H_{j-1} >= b_0 / H_1 + sum_{i>=1} b_i H_{i-1}``.

    ``a`` holds ``a_l..a_r`` and ``b`` holds ``b_0..b_{l-1}``; the relation is
    enforced by rescaling ``b``, and the rescaled coefficients are reported.
    """
    values = _curvatures(kappa)
    n = values.size
    coeff_a = np.asarray(a, dtype=float)
    coeff_b = np.asarray(b, dtype=float)
    upper = lower + coeff_a.size - 1
    if not 1 <= lower <= upper <= n:
        raise DomainError(f"need 1 <= l <= r <= n, got l={lower}, r={upper}, n={n}")
    if coeff_b.size != lower:
        raise DomainError(f"expected {lower} b coefficients (b_0..b_{lower - 1}), got {coeff_b.size}")
    for name, coeffs in (("a", coeff_a), ("b", coeff_b)):
        if np.any(coeffs < 0.0) or not np.any(coeffs > 0.0):
            raise DomainError(f"{name} coefficients must be nonnegative and not all vanishing")
    sigma, mean = symmetric_functions(values)
    if not in_garding_cone(sigma, upper):
        raise DomainError(f"curvatures {values.tolist()} are not in the cone Gamma_{upper}")

    top = float(coeff_a @ mean[lower : upper + 1])
    bottom = float(coeff_b @ mean[:lower])
    coeff_b = coeff_b * (top / bottom)

    lhs = float(coeff_a @ mean[lower - 1 : upper])
    rhs = float(coeff_b[0] / mean[1] + coeff_b[1:] @ mean[: lower - 1])
    scale = max(1.0, abs(lhs), abs(rhs))
    return InequalityResult(
        lhs,
        rhs,
        lhs >= rhs - SLACK * scale,
        _all_equal(values),
        {"b": coeff_b.tolist(), "r": upper},
    )


# ---------------------------------------------------------------------------
# Property sweeps
# ---------------------------------------------------------------------------
@dataclass
class SweepResult:
    name: str
    instances: int = 0
    violations: int = 0
    equality_cases: int = 0
    equality_mismatches: int = 0
    worst_margin: float = float("inf")

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.equality_mismatches == 0

    def record(self, result: InequalityResult, *, expect_equality: bool, margin: float) -> None:
        self.instances += 1
        self.worst_margin = min(self.worst_margin, margin)
        if not result.holds:
            self.violations += 1
        if expect_equality:
            self.equality_cases += 1
            scale = max(1.0, abs(result.lhs), abs(result.rhs))
            if not result.equality or abs(result.lhs - result.rhs) > 1e-10 * scale:
                self.equality_mismatches += 1

    def to_payload(self) -> dict[str, Any]:
        return {
            "instances": self.instances,
            "violations": self.violations,
            "equality_cases": self.equality_cases,
            "equality_mismatches": self.equality_mismatches,
            "worst_margin": self.worst_margin,
        }


def _random_curvatures(rng: np.random.Generator, n: int, *, equal: bool) -> np.ndarray:
    if equal:
        return np.full(n, float(rng.uniform(0.1, 5.0)))
    return rng.uniform(0.05, 5.0, size=n)


def newton_maclaurin_sweep(samples: int = 10_000, *, max_dim: int = 4, seed: int = 0) -> SweepResult:
    rng = np.random.default_rng(seed)
    sweep = SweepResult("newton-maclaurin")
    tuples = {n: admissible_index_tuples(n) for n in range(1, max_dim + 1)}
    for trial in range(samples):
        n = int(rng.integers(1, max_dim + 1))
        if not tuples[n]:
            continue
        equal = trial % 10 == 0
        kappa = _random_curvatures(rng, n, equal=equal)
        _, mean = symmetric_functions(kappa)
        flagged = _all_equal(kappa)
        for indices in tuples[n]:
            result = _maclaurin(mean, indices, flagged)
            sweep.record(result, expect_equality=equal, margin=result.rhs - result.lhs)
    LOG.info("newton-maclaurin sweep: %d instances, %d violations", sweep.instances, sweep.violations)
    return sweep


def coefficient_inequality_sweep(samples: int = 10_000, *, max_dim: int = 4, seed: int = 0) -> SweepResult:
    rng = np.random.default_rng(seed)
    sweep = SweepResult("coefficient-inequality")
    for trial in range(samples):
        n = int(rng.integers(1, max_dim + 1))
        upper = int(rng.integers(1, n + 1))
        lower = int(rng.integers(1, upper + 1))
        equal = trial % 10 == 0
        kappa = _random_curvatures(rng, n, equal=equal)
        a = rng.uniform(0.0, 1.0, size=upper - lower + 1)
        a[int(rng.integers(0, a.size))] += 0.1
        b = rng.uniform(0.0, 1.0, size=lower)
        b[int(rng.integers(0, b.size))] += 0.1
        result = check_coefficient_inequality(kappa, lower, a, b)
        sweep.record(result, expect_equality=equal, margin=result.lhs - result.rhs)
    LOG.info("coefficient inequality sweep: %d instances, %d violations", sweep.instances, sweep.violations)
    return sweep
