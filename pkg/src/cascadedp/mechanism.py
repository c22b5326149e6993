"""Input perturbation and consistent range-query answering.

The mechanism adds correlated leaf noise to the confidential vector and
answers every query as a linear read of the single privatized vector, so
disjoint-union additivity holds by construction and the output is an
unbiased, fully transparent Gaussian perturbation of the data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .privacy import CalibratedSigma
from .sampler import cascade_sample, node_leaf_range
from .trees import GeneralTree, general_tree_sample
from .validation import as_generator, check_data_vector, check_sigma, is_power_of_two, next_power_of_two

__all__ = ["RangeQuery", "PrivatizedVector", "perturb", "answer_range", "range_decompose"]


@dataclass(frozen=True)
class RangeQuery:
    """Inclusive index range [lo, hi] over the data vector."""

    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"invalid range [{self.lo}, {self.hi}]")


@dataclass
class PrivatizedVector:
    """A privatized data vector with precomputed prefix sums.

    meta records the full noise law (scale, covariance family, depth,
    seed) so downstream consumers can write the exact likelihood of the
    release.
    """

    values: np.ndarray
    prefix_sums: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.size


def _as_scale(sigma) -> float:
    if isinstance(sigma, CalibratedSigma):
        return check_sigma(sigma.sigma)
    return check_sigma(sigma)


def _finish(values: np.ndarray, meta: dict) -> PrivatizedVector:
    prefix = np.zeros(values.size + 1)
    np.cumsum(values, out=prefix[1:])
    return PrivatizedVector(values=values, prefix_sums=prefix, meta=meta)


def perturb(x, sigma, rng, *, tree: GeneralTree | None = None) -> PrivatizedVector:
    """Add correlated Gaussian noise to a data vector.

    With no tree given, the vector is laid out on a perfect binary tree;
    lengths that are not a power of two are padded with zero slots whose
    noise is discarded, which leaves all leaf-noise marginals and
    correlations intact on the original range.  With an explicit tree,
    noise comes from the general-tree sampler and the tree's leaf count
    must match the data length.

    sigma may be a CalibratedSigma or a plain positive scale; rng may be
    a numpy Generator or an int seed (recorded in meta when given).
    """
    x = check_data_vector(x)
    scale = _as_scale(sigma)
    rng, seed = as_generator(rng)
    n = x.size

    if tree is not None:
        leaves = tree.leaves()
        if len(leaves) != n:
            raise ValueError(f"tree has {len(leaves)} leaves for {n} data slots")
        noise = general_tree_sample(tree, scale, rng)[leaves]
        meta = {"mechanism": "correlated", "covariance": "general-tree cascade",
                "sigma": scale, "n": n, "seed": seed}
        return _finish(x + noise, meta)

    padded = n if is_power_of_two(n) else next_power_of_two(n)
    depth = padded.bit_length() - 1
    noise = cascade_sample(depth, scale, rng).leaves[:n]
    meta = {"mechanism": "correlated", "covariance": "binary-tree correlated gaussian",
            "sigma": scale, "n": n, "depth": depth, "padded_to": padded, "seed": seed}
    return _finish(x + noise, meta)


def answer_range(p: PrivatizedVector, q: RangeQuery) -> float:
    """Sum of privatized values over [q.lo, q.hi], an O(1) prefix read.

    All answers are linear reads of one vector, so for any partition of a
    range into disjoint parts the whole equals the sum of the parts up to
    float rounding.
    """
    if q.hi >= p.n:
        raise ValueError(f"range [{q.lo}, {q.hi}] exceeds data length {p.n}")
    return float(p.prefix_sums[q.hi + 1] - p.prefix_sums[q.lo])


def range_decompose(k: int, q: RangeQuery) -> list[int]:
    """Canonical cover of [q.lo, q.hi] by maximal disjoint subtrees.

    Returns level-order node indices of the perfect depth-k tree whose
    leaf spans exactly tile the range.  The cover has at most 2k - 2
    nodes for k >= 2 (a single node for k <= 1).
    """
    n = 1 << k
    if q.hi >= n:
        raise ValueError(f"range [{q.lo}, {q.hi}] exceeds leaf count {n}")
    out: list[int] = []
    stack = [0]
    while stack:
        node = stack.pop()
        lo, hi = node_leaf_range(k, node)
        if q.lo <= lo and hi <= q.hi:
            out.append(node)
            continue
        mid = (lo + hi) // 2
        # visit children only where they intersect the query
        if q.hi > mid:
            stack.append(2 * node + 2)
        if q.lo <= mid:
            stack.append(2 * node + 1)
    return out
