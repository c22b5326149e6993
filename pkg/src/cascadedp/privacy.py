"""Noise-scale calibration for (epsilon, delta) privacy targets.

For additive Gaussian noise with covariance sigma^2 C and neighboring
data vectors at L1 distance at most one, the mechanism is
(epsilon, delta)-differentially private once

    sigma^2 >= 2 * max_diag(C^-1) * ln(2/delta) / epsilon^2,

valid for epsilon in (0, 1] and delta in (0, 1/2].  The calibrators below
return the minimal admissible sigma^2 (equality in the bound); callers may
inflate.  Logarithms are natural: the underlying tail bound is
exp(-x^2/2), which pairs with ln.

For the tree-correlated family every diagonal entry of the precision
matrix is 1 + log2(n)/3, which gives the closed form used by
calibrate_tree; the identity covariance gives calibrate_iid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .validation import is_power_of_two

__all__ = ["PrivacyBudget", "CalibratedSigma", "calibrate_general", "calibrate_tree", "calibrate_iid"]


@dataclass(frozen=True)
class PrivacyBudget:
    """A validated (epsilon, delta) pair.

    The calibration theorem is stated only for epsilon in (0, 1] and
    delta in (0, 1/2]; values outside are hard errors, not extrapolations.
    """

    epsilon: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if not 0.0 < self.delta <= 0.5:
            raise ValueError(f"delta must be in (0, 1/2], got {self.delta}")


@dataclass(frozen=True)
class CalibratedSigma:
    """A calibrated noise scale and its square, tagged with its source."""

    sigma: float
    sigma_squared: float
    source: str  # "general" or "tree"


def calibrate_general(diag_max: float, budget: PrivacyBudget) -> CalibratedSigma:
    """Minimal sigma for an arbitrary covariance with precision diagonal <= diag_max."""
    diag_max = float(diag_max)
    if not diag_max > 0.0:
        raise ValueError(f"diag_max must be positive, got {diag_max}")
    s2 = 2.0 * diag_max * math.log(2.0 / budget.delta) / budget.epsilon**2
    return CalibratedSigma(sigma=math.sqrt(s2), sigma_squared=s2, source="general")


def calibrate_tree(n: int, budget: PrivacyBudget) -> CalibratedSigma:
    """Minimal sigma for the tree-correlated mechanism over n = 2^k slots."""
    n = int(n)
    if n < 2 or not is_power_of_two(n):
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    k = n.bit_length() - 1
    s2 = (2.0 + 2.0 * k / 3.0) * math.log(2.0 / budget.delta) / budget.epsilon**2
    return CalibratedSigma(sigma=math.sqrt(s2), sigma_squared=s2, source="tree")


def calibrate_iid(budget: PrivacyBudget) -> CalibratedSigma:
    """Minimal sigma for independent per-slot Gaussian noise (identity covariance)."""
    return calibrate_general(1.0, budget)
