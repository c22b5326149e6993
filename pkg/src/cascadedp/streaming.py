"""Incremental cascade sampling for streaming data.

Leaf noises are emitted one element at a time.  While the current tree
has unfilled leaves, nodes on the path to the next leaf are expanded
lazily, so only the active spine is ever materialized.  When the tree is
full it doubles: the old root X0 becomes the left child of a new root,
and the right child is drawn conditionally,

    X1 = -X0/2 + (sqrt(3)/2) * y,      X' = X0 + X1,

which reproduces the joint law of a batch cascade over the doubled tree
(X1 is marginally Normal(0, sigma^2) with correlation -1/2 to X0).  Work
is O(log n) per element in the worst case and O(1) amortized.

After 2^k emitted elements the joint distribution of all emitted leaf
noises equals that of cascade_sample(k, sigma)'s leaves.

Note on privacy accounting: the noise scale is caller-supplied.  The
tree-specific calibration assumes a fixed final size n; whether a stream
that keeps growing needs a larger scale than the final-n calibration is
an open question, so no (epsilon, delta) claim is attached here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampler import SQRT3_OVER_2, split_node
from .validation import as_generator, check_sigma

__all__ = ["StreamState", "stream_next", "CascadeStream"]


@dataclass
class StreamState:
    """Mutable state of one streaming sampler.

    spine holds (height, value) pairs of pending subtree roots whose
    leaves have not been emitted yet, deepest last; its length never
    exceeds the current depth + 1.  With batch set, values are arrays and
    the state drives that many independent streams in lockstep.
    """

    sigma: float
    capacity: int = 0
    count: int = 0
    root_value: float | np.ndarray = 0.0
    spine: list = field(default_factory=list)
    batch: int | None = None

    @property
    def depth(self) -> int:
        return max(self.capacity, 1).bit_length() - 1


def stream_next(state: StreamState, rng) -> tuple[float, StreamState]:
    """Emit the noise for the next stream position and advance the state."""
    rng, _ = as_generator(rng)
    sigma = check_sigma(state.sigma)
    size = state.batch

    if state.count == state.capacity:
        if state.capacity == 0:
            # the first element is its own root
            root = rng.normal(0.0, sigma, size=size)
            state.capacity = 1
            state.root_value = root
            state.spine.append((0, root))
        else:
            y = rng.normal(0.0, sigma, size=size)
            right = -0.5 * state.root_value + SQRT3_OVER_2 * y
            state.root_value = state.root_value + right
            state.spine.append((state.depth, right))
            state.capacity *= 2

    height, value = state.spine.pop()
    while height > 0:
        y = rng.normal(0.0, sigma, size=size)
        left, right = split_node(value, y)
        state.spine.append((height - 1, right))
        height, value = height - 1, left
    state.count += 1
    return value, state


class CascadeStream:
    """Convenience wrapper owning a StreamState and its generator."""

    def __init__(self, sigma: float, rng=None, batch: int | None = None):
        self._rng, self.seed = as_generator(rng)
        self.state = StreamState(sigma=check_sigma(sigma), batch=batch)

    def next(self):
        value, _ = stream_next(self.state, self._rng)
        return value

    def take(self, count: int) -> np.ndarray:
        """Noise for the next `count` positions; rows are positions."""
        return np.asarray([self.next() for _ in range(count)])
