"""Linear-time sampling of correlated Gaussian noise over a perfect binary tree.

The sampler works top-down: the root noise is drawn first, then every
node's value is split into two children that sum back to the parent and
are each marginally Gaussian with the same variance,

    left  = parent/2 + (sqrt(3)/2) * y
    right = parent/2 - (sqrt(3)/2) * y

with y a fresh independent draw at the parent's scale.  One draw per
internal node plus the root makes the total cost linear in the number of
nodes, against the cubic cost of a dense Cholesky factorization.

Trees are stored in level-order ("heap") layout: the root is index 0 and
node m has children 2m+1 and 2m+2.  Gaussian variates come from numpy's
Generator (PCG64 + ziggurat), so a fixed seed reproduces the same tree
bit for bit on any platform running the same numpy version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .validation import as_generator, check_depth, check_sigma

__all__ = [
    "SQRT3_OVER_2",
    "split_node",
    "NoiseTree",
    "cascade_sample",
    "cascade_tree_batch",
    "cascade_leaf_batch",
    "cholesky_reference_sample",
    "n_nodes",
    "level_of",
    "level_slice",
    "node_leaf_range",
]

SQRT3_OVER_2 = np.sqrt(3.0) / 2.0


def split_node(x, y):
    """Split a parent value into two children that sum back to the parent.

    For independent unit Gaussians the two outputs are again unit
    Gaussians with correlation -1/2.  Works elementwise on arrays.
    """
    half = 0.5 * x
    spread = SQRT3_OVER_2 * y
    return half + spread, half - spread


# ---------------------------------------------------------------------------
# heap-layout index arithmetic


def n_nodes(depth: int) -> int:
    """Node count of a perfect binary tree: 2^(depth+1) - 1."""
    return (1 << (depth + 1)) - 1


def level_of(node: int) -> int:
    """Level of a heap index (root = level 0)."""
    return (node + 1).bit_length() - 1


def level_slice(level: int) -> slice:
    """Heap indices occupied by one level."""
    return slice((1 << level) - 1, (1 << (level + 1)) - 1)


def node_leaf_range(depth: int, node: int) -> tuple[int, int]:
    """Inclusive leaf-index range [lo, hi] covered by a heap node."""
    lev = level_of(node)
    if lev > depth:
        raise ValueError(f"node {node} is below depth {depth}")
    span = 1 << (depth - lev)
    lo = (node + 1 - (1 << lev)) * span
    return lo, lo + span - 1


# ---------------------------------------------------------------------------


@dataclass
class NoiseTree:
    """Correlated noise values for every node of a perfect binary tree.

    values is in level-order layout with 2^(depth+1) - 1 entries; each
    internal node equals the sum of its two children up to float rounding.
    """

    depth: int
    sigma: float
    values: np.ndarray
    seed: int | None = None

    @property
    def leaves(self) -> np.ndarray:
        """The 2^depth leaf noises, in data order."""
        return self.values[(1 << self.depth) - 1 :]

    @property
    def root(self) -> float:
        return float(self.values[0])

    def level(self, level: int) -> np.ndarray:
        return self.values[level_slice(level)]

    def to_json(self) -> str:
        header = {
            "depth": self.depth,
            "sigma": self.sigma,
            "seed": self.seed,
            "values": self.values.tolist(),
        }
        return json.dumps(header)

    @classmethod
    def from_json(cls, text: str) -> "NoiseTree":
        obj = json.loads(text)
        values = np.asarray(obj["values"], dtype=np.float64)
        depth = int(obj["depth"])
        if values.size != n_nodes(depth):
            raise ValueError(
                f"value count {values.size} does not match depth {depth}"
            )
        return cls(depth=depth, sigma=float(obj["sigma"]), values=values, seed=obj.get("seed"))


def _cascade_values(k: int, sigma: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Level-order noise array; trailing axis of length `size` when batching."""
    shape = (n_nodes(k),) if size is None else (n_nodes(k), size)
    values = np.empty(shape)
    values[0] = rng.normal(0.0, sigma, size=size)
    for lev in range(k):
        lo, hi = (1 << lev) - 1, (1 << (lev + 1)) - 1
        parents = values[lo:hi]
        y = rng.normal(0.0, sigma, size=(hi - lo,) if size is None else (hi - lo, size))
        children = values[2 * lo + 1 : 2 * hi + 1]
        half = 0.5 * parents
        spread = SQRT3_OVER_2 * y
        children[0::2] = half + spread
        children[1::2] = half - spread
    return values


def cascade_sample(k: int, sigma: float, rng) -> NoiseTree:
    """Sample a full correlated noise tree of depth k in Theta(2^k) time.

    Every node is marginally Normal(0, sigma^2); the leaf vector has the
    covariance produced by build_correlation(k) scaled by sigma^2.
    Consumes exactly 2^k Gaussian draws: one for the root and one per
    internal node.
    """
    k = check_depth(k, minimum=0)
    sigma = check_sigma(sigma)
    rng, seed = as_generator(rng)
    return NoiseTree(depth=k, sigma=sigma, values=_cascade_values(k, sigma, rng), seed=seed)


def cascade_tree_batch(k: int, sigma: float, rng, size: int) -> np.ndarray:
    """Noise for `size` independent trees at once, shape (size, 2^(k+1)-1).

    The vectorized replicate path for Monte Carlo work; each row is one
    tree in level-order layout.
    """
    k = check_depth(k, minimum=0)
    sigma = check_sigma(sigma)
    rng, _ = as_generator(rng)
    return _cascade_values(k, sigma, rng, size=int(size)).T


def cascade_leaf_batch(k: int, sigma: float, rng, size: int) -> np.ndarray:
    """Leaf noise for `size` independent trees, shape (size, 2^k)."""
    return cascade_tree_batch(k, sigma, rng, size)[:, (1 << k) - 1 :]


def cholesky_reference_sample(k: int, sigma: float, rng, size: int | None = None) -> np.ndarray:
    """Reference leaf sampler through a dense Cholesky factor.

    O(n^3) setup and O(n^2) per draw; exists to cross-check the cascade
    path and to calibrate Monte Carlo tolerances, not for production use.
    """
    from .correlation import build_correlation

    k = check_depth(k, minimum=1)
    sigma = check_sigma(sigma)
    rng, _ = as_generator(rng)
    factor = np.linalg.cholesky(build_correlation(k))
    z = rng.standard_normal((size or 1, factor.shape[0]))
    draws = sigma * (z @ factor.T)
    return draws[0] if size is None else draws
