"""Weight functions ``f(u_bar)`` for the Minkowski-type formulas.

Each weight carries a monotonicity tag.  The inequality checks read the sign
they expect from the tag, so the tag is verified against ``f'`` on the range
of ``u_bar`` actually realised on the surface before it is trusted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, UsageError

TAGS = ("constant", "increasing", "decreasing", "none")


@dataclass(frozen=True)
class WeightFunction:
    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    tag: str

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.value(u)

    def sign(self) -> int:
        """Sign of ``f'`` promised by the tag (0 for constants)."""
        return {"constant": 0, "increasing": 1, "decreasing": -1}.get(self.tag, 0)

    def verify_monotonicity(self, u: np.ndarray) -> None:
        """Raise :class:`DomainError` if ``f'`` disagrees with the tag on ``u``."""
        if self.tag == "none":
            raise DomainError(f"weight {self.name!r} has no monotonicity tag")
        if self.tag not in TAGS:
            raise DomainError(f"unknown monotonicity tag {self.tag!r}")
        samples = np.linspace(float(np.min(u)), float(np.max(u)), 257)
        slope = np.asarray(self.derivative(samples), dtype=float)
        scale = max(1.0, float(np.max(np.abs(slope))))
        if self.tag == "constant" and np.max(np.abs(slope)) > 1e-12 * scale:
            raise DomainError(f"weight {self.name!r} is tagged constant but varies")
        if self.tag == "increasing" and np.min(slope) < -1e-12 * scale:
            raise DomainError(f"weight {self.name!r} is tagged increasing but decreases on the surface")
        if self.tag == "decreasing" and np.max(slope) > 1e-12 * scale:
            raise DomainError(f"weight {self.name!r} is tagged decreasing but increases on the surface")


def _require_positive(u: np.ndarray, name: str) -> np.ndarray:
    if np.min(u) <= 0.0:
        raise DomainError(f"weight {name!r} needs u_bar > 0")
    return u


def softplus(center: float = 1.0, sharpness: float = 4.0) -> WeightFunction:
    """Smoothed ramp ``log(1 + exp(k (u - c))) / k``."""

    def value(u: np.ndarray) -> np.ndarray:
        return np.logaddexp(0.0, sharpness * (u - center)) / sharpness

    def derivative(u: np.ndarray) -> np.ndarray:
        return 0.5 * (1.0 + np.tanh(0.5 * sharpness * (u - center)))

    return WeightFunction("softplus", value, derivative, "increasing")


WEIGHTS: dict[str, WeightFunction] = {
    "const": WeightFunction("const", lambda u: np.ones_like(u), lambda u: np.zeros_like(u), "constant"),
    "u": WeightFunction("u", lambda u: np.asarray(u, float), lambda u: np.ones_like(u), "increasing"),
    "u2": WeightFunction("u2", lambda u: np.asarray(u, float) ** 2, lambda u: 2.0 * np.asarray(u, float), "increasing"),
    "exp_neg": WeightFunction("exp_neg", lambda u: np.exp(-u), lambda u: -np.exp(-u), "decreasing"),
    "softplus": softplus(),
    "inv": WeightFunction(
        "inv",
        lambda u: 1.0 / _require_positive(u, "inv"),
        lambda u: -1.0 / _require_positive(u, "inv") ** 2,
        "decreasing",
    ),
}


def get_weight(name: str) -> WeightFunction:
    try:
        return WEIGHTS[name]
    except KeyError:
        raise UsageError(f"unknown weight {name!r}; valid: {', '.join(WEIGHTS)}") from None
