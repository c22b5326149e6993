"""Noise allocation over general (not necessarily perfect) binary trees.

Each node has zero, one, or two children.  Two-child nodes split their
value exactly like the perfect-tree cascade; a one-child node passes its
value to the child unchanged, consuming no randomness, so the parent/sum
relation and the Normal(0, sigma^2) marginal hold at every node for any
tree shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampler import split_node
from .validation import as_generator, check_sigma

__all__ = ["GeneralTree", "general_tree_sample"]


@dataclass(frozen=True)
class GeneralTree:
    """Rooted binary tree given as a child table.

    children[i] is a (left, right) pair of node ids or None.  Node 0 is
    the root.  A node with a single child must carry it in the left slot;
    that convention keeps the draw sequence a function of tree shape
    alone.
    """

    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(tuple(c) for c in self.children))
        self._validate()

    def _validate(self):
        n = len(self.children)
        if n == 0:
            raise ValueError("tree has no nodes")
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        for i, (left, right) in enumerate(self.children):
            if left is None and right is not None:
                raise ValueError(f"node {i}: a single child must occupy the left slot")
            for child in (left, right):
                if child is None:
                    continue
                if not 0 <= child < n:
                    raise ValueError(f"node {i} references unknown child {child}")
                if child == 0 or seen[child]:
                    raise ValueError(f"node {child} has two parents or is the root")
                seen[child] = True
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise ValueError(f"node {missing} is unreachable from the root")

    def __len__(self) -> int:
        return len(self.children)

    def leaves(self) -> list[int]:
        """Leaf node ids in left-first depth-first order (data-slot order)."""
        out, stack = [], [0]
        while stack:
            node = stack.pop()
            left, right = self.children[node]
            if left is None:
                out.append(node)
                continue
            if right is not None:
                stack.append(right)
            stack.append(left)
        return out

    def max_depth(self) -> int:
        depth = np.zeros(len(self.children), dtype=int)
        for node in self.breadth_first():
            for child in self.children[node]:
                if child is not None:
                    depth[child] = depth[node] + 1
        return int(depth.max())

    def breadth_first(self) -> list[int]:
        order = [0]
        head = 0
        while head < len(order):
            left, right = self.children[order[head]]
            head += 1
            if left is not None:
                order.append(left)
            if right is not None:
                order.append(right)
        return order

    # -- common shapes -----------------------------------------------------

    @classmethod
    def perfect(cls, depth: int) -> "GeneralTree":
        total = (1 << (depth + 1)) - 1
        first_leaf = (1 << depth) - 1
        return cls(
            [(2 * i + 1, 2 * i + 2) if i < first_leaf else (None, None) for i in range(total)]
        )

    @classmethod
    def path(cls, length: int) -> "GeneralTree":
        """A chain of `length` nodes, each with a single child."""
        if length < 1:
            raise ValueError("path needs at least one node")
        return cls([(i + 1, None) if i + 1 < length else (None, None) for i in range(length)])

    @classmethod
    def caterpillar(cls, depth: int) -> "GeneralTree":
        """Every left child continues the spine, every right child is a leaf."""
        if depth < 1:
            raise ValueError("caterpillar needs depth >= 1")
        table: dict[int, tuple] = {}
        spine, next_id = 0, 1
        for _ in range(depth):
            left, right = next_id, next_id + 1
            next_id += 2
            table[spine] = (left, right)
            table[left] = (None, None)
            table[right] = (None, None)
            spine = left
        return cls([table[i] for i in range(next_id)])


def general_tree_sample(tree: GeneralTree, sigma: float, rng, size: int | None = None) -> np.ndarray:
    """Noise values for every node of a general binary tree.

    Nodes are processed in breadth-first order; the root takes one draw,
    each two-child node takes one draw for its split, and one-child nodes
    copy the parent value without drawing.  Returns an array indexed by
    node id (with a trailing replicate axis when size is given).
    """
    if not isinstance(tree, GeneralTree):
        raise ValueError("expected a GeneralTree")
    sigma = check_sigma(sigma)
    rng, _ = as_generator(rng)
    values = [None] * len(tree)
    values[0] = rng.normal(0.0, sigma, size=size)
    for node in tree.breadth_first():
        left, right = tree.children[node]
        if left is None:
            continue
        if right is None:
            values[left] = values[node]
        else:
            y = rng.normal(0.0, sigma, size=size)
            values[left], values[right] = split_node(values[node], y)
    return np.asarray(values)
