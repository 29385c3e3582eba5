from __future__ import annotations

import numpy as np
import pytest

from wulffcap.errors import DomainError, UsageError
from wulffcap.weights import WEIGHTS, WeightFunction, get_weight


@pytest.mark.parametrize("name, sign", [("const", 0), ("u", 1), ("u2", 1), ("softplus", 1), ("exp_neg", -1), ("inv", -1)])
def test_tags_match_derivatives(name, sign):
    weight = WEIGHTS[name]
    assert weight.sign() == sign
    weight.verify_monotonicity(np.linspace(0.5, 2.0, 11))


def test_mislabelled_weight_is_rejected():
    liar = WeightFunction("liar", lambda u: np.exp(-u), lambda u: -np.exp(-u), "increasing")
    with pytest.raises(DomainError, match="decreases"):
        liar.verify_monotonicity(np.array([0.5, 1.0]))


def test_untagged_weight_is_rejected():
    weight = WeightFunction("free", np.sin, np.cos, "none")
    with pytest.raises(DomainError):
        weight.verify_monotonicity(np.array([0.0, 1.0]))


def test_inverse_weight_needs_positive_support():
    with pytest.raises(DomainError):
        WEIGHTS["inv"](np.array([1.0, 0.0]))


def test_unknown_weight_lists_choices():
    with pytest.raises(UsageError, match="exp_neg"):
        get_weight("cubic")
