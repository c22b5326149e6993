"""Reference mechanisms used for utility comparisons.

Two baselines, calibrated through the same correlated-Gaussian theorem as
the main mechanism so that (epsilon, delta) accounting is uniform:

* independent Gaussian input perturbation (identity covariance), and
* the binary-tree output mechanism: every subtree sum is released with
  independent Gaussian noise.  One data element sits in k + 1 subtree
  sums, so the release is the general theorem applied with precision
  diagonal k + 1.  Its answers are sums of noisy nodes and are not
  internally consistent (a parent rarely equals its children's sum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mechanism import PrivatizedVector, RangeQuery, _finish, range_decompose
from .privacy import PrivacyBudget, calibrate_general, calibrate_iid
from .sampler import n_nodes
from .validation import as_generator, check_data_vector, is_power_of_two, next_power_of_two

__all__ = ["iid_perturb", "bt_perturb", "BinaryTreeRelease", "bt_answer_range", "subtree_sums"]


def iid_perturb(x, budget: PrivacyBudget, rng) -> PrivatizedVector:
    """Add independent Normal(0, sigma^2) noise to every slot."""
    x = check_data_vector(x)
    rng, seed = as_generator(rng)
    cal = calibrate_iid(budget)
    values = x + rng.normal(0.0, cal.sigma, size=x.size)
    meta = {"mechanism": "iid", "covariance": "identity", "sigma": cal.sigma,
            "n": x.size, "seed": seed}
    return _finish(values, meta)


@dataclass
class BinaryTreeRelease:
    """Noisy subtree sums in level-order layout.

    Node values are true subtree sums plus independent noise; the release
    is not internally consistent.
    """

    noisy_nodes: np.ndarray
    sigma_bt: float
    depth: int
    n: int
    meta: dict


def subtree_sums(x_padded: np.ndarray) -> np.ndarray:
    """True subtree sums of a power-of-two vector, level-order layout."""
    n = x_padded.size
    depth = n.bit_length() - 1
    sums = np.empty(n_nodes(depth))
    sums[n - 1 :] = x_padded
    for lev in range(depth - 1, -1, -1):
        lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
        children = sums[2 * lo + 1 : 2 * hi + 1]
        sums[lo:hi] = children[0::2] + children[1::2]
    return sums


def bt_perturb(x, budget: PrivacyBudget, rng) -> BinaryTreeRelease:
    """Release every subtree sum with independent Gaussian noise.

    The scale comes from the general calibration with diag_max = k + 1:
    changing one element moves k + 1 node sums by one each.
    """
    x = check_data_vector(x)
    rng, seed = as_generator(rng)
    n = x.size
    padded = n if is_power_of_two(n) else next_power_of_two(n)
    depth = max(padded.bit_length() - 1, 0)
    cal = calibrate_general(depth + 1, budget)
    x_padded = np.zeros(padded)
    x_padded[:n] = x
    sums = subtree_sums(x_padded)
    noisy = sums + rng.normal(0.0, cal.sigma, size=sums.size)
    meta = {"mechanism": "btree", "sigma": cal.sigma, "n": n, "depth": depth, "seed": seed}
    return BinaryTreeRelease(noisy_nodes=noisy, sigma_bt=cal.sigma, depth=depth, n=n, meta=meta)


def bt_answer_range(release: BinaryTreeRelease, q: RangeQuery) -> float:
    """Answer a range by summing the noisy nodes of its canonical cover."""
    if q.hi >= release.n:
        raise ValueError(f"range [{q.lo}, {q.hi}] exceeds data length {release.n}")
    nodes = range_decompose(release.depth, q)
    return float(release.noisy_nodes[nodes].sum())
