"""Shared test instrumentation: counting and coefficient-extracting RNGs.

BasisRng replaces Gaussian draws with scaled unit basis vectors.  Because
every sampler in the package is a linear map of its draws, running the
production code against BasisRng yields the exact coefficient matrix of
that map, and coefficients @ coefficients.T is the exact output
covariance.  That turns distributional claims into exact matrix checks
with no Monte Carlo noise.
"""

from __future__ import annotations

import numpy as np


class CountingRng:
    """Wraps a Generator and counts scalar-equivalent normal draws."""

    def __init__(self, rng):
        self._rng = rng
        self.count = 0

    def normal(self, loc=0.0, scale=1.0, size=None):
        self.count += 1 if size is None else int(np.prod(size))
        return self._rng.normal(loc, scale, size)

    def standard_normal(self, size=None, **kwargs):
        self.count += 1 if size is None else int(np.prod(size))
        return self._rng.standard_normal(size, **kwargs)

    def random(self, *args, **kwargs):
        return self._rng.random(*args, **kwargs)

    def integers(self, *args, **kwargs):
        return self._rng.integers(*args, **kwargs)


class BasisRng:
    """Emits sigma-scaled unit basis rows of a fixed width.

    Drive a sampler with size=dim (so each conceptual draw is a width-dim
    vector) and the returned node values are rows of the sampler's linear
    coefficient map.  dim must be at least the number of draws consumed;
    unused trailing columns stay zero and do not affect covariances.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.used = 0

    def _row(self, scale):
        if self.used >= self.dim:
            raise AssertionError("BasisRng dimension too small for this sampler")
        row = np.zeros(self.dim)
        row[self.used] = scale
        self.used += 1
        return row

    def normal(self, loc=0.0, scale=1.0, size=None):
        assert loc == 0.0
        if size is None:
            raise AssertionError("BasisRng only supports vectorized draws (size=dim)")
        if isinstance(size, (int, np.integer)):
            assert int(size) == self.dim
            return self._row(scale)
        count, width = size
        assert width == self.dim
        return np.vstack([self._row(scale) for _ in range(count)])


def exact_covariance(coefficients: np.ndarray) -> np.ndarray:
    """Covariance of a linear map of i.i.d. unit draws."""
    return coefficients @ coefficients.T


def brute_force_range_variance(c: np.ndarray, lo: int, hi: int) -> float:
    """Direct double-sum variance of a consecutive range, the slow oracle."""
    total = 0.0
    for i in range(lo, hi + 1):
        for j in range(lo, hi + 1):
            total += c[i, j]
    return total


def brute_force_dyadic_cover(k: int, lo: int, hi: int) -> list[int]:
    """Greedy minimal dyadic cover, independent of the production recursion.

    Walks left to right, at each position taking the largest aligned
    dyadic block that fits inside the remaining range.
    """
    out = []
    pos = lo
    while pos <= hi:
        span = 1 << k
        while span > 1 and (pos % span != 0 or pos + span - 1 > hi):
            span //= 2
        level = k - span.bit_length() + 1
        out.append((1 << level) - 1 + pos // span)
        pos += span
    return out
