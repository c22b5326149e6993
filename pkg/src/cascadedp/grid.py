"""Correlated noise for two-dimensional range queries.

Data cells are leaves of a row tree crossed with a column tree; every
node pair (I, J) names a sub-rectangle and gets its own noise value.  The
column axis of the row root is filled by one ordinary 1-D cascade, and
every row split applies the cascade step pointwise across all column
nodes, using a fresh independent 1-D column cascade as the y input.  Both
additivity identities then hold at once:

    X[I, J] = X[I0, J] + X[I1, J]       (row children)
    X[I, J] = X[I, J0] + X[I, J1]       (column children)

and every entry, row sum, column sum, and total is Normal(0, sigma^2).
Cost is linear in the number of grid cells.

No privacy calibration claim is attached to the 2-D sampler: the
neighboring relation for grids is not pinned down here, so the scale is
caller-supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampler import SQRT3_OVER_2, _cascade_values, n_nodes
from .validation import as_generator, check_depth, check_sigma

__all__ = ["NoiseGrid2D", "sample_2d"]


@dataclass
class NoiseGrid2D:
    """Noise for all (row node, column node) pairs.

    values[i, j] is the noise of row-tree node i crossed with column-tree
    node j, both in level-order layout.
    """

    depths: tuple[int, int]
    sigma: float
    values: np.ndarray

    @property
    def leaf_block(self) -> np.ndarray:
        """The 2^k1 x 2^k2 block of per-cell noises."""
        k1, k2 = self.depths
        return self.values[(1 << k1) - 1 :, (1 << k2) - 1 :]


def sample_2d(k1: int, k2: int, sigma: float, rng, size: int | None = None) -> NoiseGrid2D:
    """Sample a full 2-D noise grid for row depth k1 and column depth k2."""
    k1 = check_depth(k1, minimum=0)
    k2 = check_depth(k2, minimum=0)
    sigma = check_sigma(sigma)
    rng, _ = as_generator(rng)

    first = _cascade_values(k2, sigma, rng, size=size)
    values = np.empty((n_nodes(k1),) + first.shape)
    values[0] = first
    for node in range((1 << k1) - 1):
        y = _cascade_values(k2, sigma, rng, size=size)
        half = 0.5 * values[node]
        spread = SQRT3_OVER_2 * y
        values[2 * node + 1] = half + spread
        values[2 * node + 2] = half - spread
    return NoiseGrid2D(depths=(k1, k2), sigma=sigma, values=values)
