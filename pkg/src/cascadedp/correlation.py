"""Dense oracle for the correlated-noise covariance family.

The covariance of the leaf noises over n = 2^k data slots is defined by a
block recursion: the base 2x2 matrix has unit diagonal and -1/2 off the
diagonal, and each doubling step places two copies on the diagonal and a
constant negative block -1/2^(2i+1) off the diagonal.  Its inverse obeys a
matching recursion whose entries are all integer multiples of 1/3, which
lets us build it exactly in integer arithmetic and divide once at the end.

These dense constructions are the ground truth the linear-time sampler and
the exact error formulas are checked against.  They are intentionally
capped at moderate depths (see DEFAULT_DENSE_CAP); large-scale code paths
never materialize these matrices.
"""

from __future__ import annotations

import numpy as np

from .validation import DEFAULT_DENSE_CAP, check_depth

__all__ = [
    "DEFAULT_DENSE_CAP",
    "build_correlation",
    "build_precision",
    "precision_diag_max",
    "range_variance_prefix",
    "range_variance",
    "max_range_variance",
]


def build_correlation(k: int, *, cap: int | None = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense covariance matrix for tree depth k (unit noise scale).

    The result is 2^k x 2^k with unit diagonal, strictly negative
    off-diagonal entries, and every row summing to 2^-k.  All entries are
    dyadic rationals, so the construction is exact in float64.
    """
    k = check_depth(k, minimum=1, cap=cap)
    c = np.array([[1.0, -0.5], [-0.5, 1.0]])
    for i in range(1, k):
        n = c.shape[0]
        out = np.empty((2 * n, 2 * n))
        out[:n, :n] = c
        out[n:, n:] = c
        # cross-block entries between the two half-trees
        out[:n, n:] = -(2.0 ** -(2 * i + 1))
        out[n:, :n] = -(2.0 ** -(2 * i + 1))
        c = out
    return c


def build_precision(k: int, *, cap: int | None = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense inverse of build_correlation(k).

    Built from the recursion for the inverse: the 2x2 base is
    [[4/3, 2/3], [2/3, 4/3]] and each doubling adds 1/3 to every entry of
    the diagonal blocks and fills the off-diagonal blocks with 2/3.  Three
    times the inverse is an integer matrix, so we accumulate integers and
    divide by three exactly once.
    """
    k = check_depth(k, minimum=1, cap=cap)
    tripled = np.array([[4, 2], [2, 4]], dtype=np.int64)
    for _ in range(1, k):
        n = tripled.shape[0]
        out = np.empty((2 * n, 2 * n), dtype=np.int64)
        out[:n, :n] = tripled + 1
        out[n:, n:] = tripled + 1
        out[:n, n:] = 2
        out[n:, :n] = 2
        tripled = out
    return tripled / 3.0


def precision_diag_max(k: int) -> float:
    """Largest diagonal entry of the precision matrix, 1 + k/3.

    Every diagonal entry equals this value; no dense matrix is built, so
    any k >= 1 is accepted.
    """
    k = check_depth(k, minimum=1)
    return 1.0 + k / 3.0


def range_variance_prefix(c: np.ndarray) -> np.ndarray:
    """Zero-padded 2-D prefix sums of a covariance matrix.

    With P = range_variance_prefix(C), the variance of the sum over the
    consecutive slots [lo, hi] is an O(1) inclusion-exclusion read; see
    range_variance.
    """
    n = c.shape[0]
    p = np.zeros((n + 1, n + 1))
    np.cumsum(c, axis=0, out=p[1:, 1:])
    np.cumsum(p[1:, 1:], axis=1, out=p[1:, 1:])
    return p


def range_variance(prefix: np.ndarray, lo, hi):
    """Variance of the consecutive sum over [lo, hi], inclusive, unit scale.

    lo and hi broadcast, so vectors of ranges are evaluated in one call.
    """
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    return (
        prefix[hi + 1, hi + 1]
        - prefix[lo, hi + 1]
        - prefix[hi + 1, lo]
        + prefix[lo, lo]
    )


def max_range_variance(k: int, *, cap: int | None = DEFAULT_DENSE_CAP) -> float:
    """Exact maximum variance over all consecutive-range sums at depth k.

    Scans all n(n+1)/2 ranges through the prefix table, one row of
    candidates per starting index.  The maximum grows like Theta(k) and is
    bounded by 2k - 2 for k >= 2.
    """
    k = check_depth(k, minimum=1, cap=cap)
    prefix = range_variance_prefix(build_correlation(k, cap=cap))
    n = prefix.shape[0] - 1
    diag = np.diagonal(prefix).copy()
    best = -np.inf
    for lo in range(n):
        vals = diag[lo + 1 :] - prefix[lo, lo + 1 :] - prefix[lo + 1 :, lo] + prefix[lo, lo]
        best = max(best, vals.max())
    return float(best)
