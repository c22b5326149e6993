"""Error metrics for privatized workloads, exact and Monte Carlo.

Three metrics quantify the gap between privatized and true query answers
for a workload matrix W and noise vector s:

* expected total squared error     E ||W s||_2^2
* worst-case expected error        max over rows of E |w s|
* expected worst-case error        E max over rows of |w s|

For Gaussian noise the first two have closed forms through the dense
covariance oracle (E|X| = sigma * sqrt(2/pi) for centered Gaussians); the
Monte Carlo estimator handles everything else by perturbing synthetic
data repeatedly and answering a uniform sample of queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baselines import subtree_sums
from .correlation import build_correlation, range_variance, range_variance_prefix
from .mechanism import RangeQuery, range_decompose
from .privacy import CalibratedSigma, PrivacyBudget, calibrate_general, calibrate_iid, calibrate_tree
from .sampler import cascade_leaf_batch, n_nodes, node_leaf_range
from .validation import (
    DEFAULT_DENSE_CAP,
    as_generator,
    check_data_vector,
    check_depth,
    is_power_of_two,
    next_power_of_two,
)

__all__ = [
    "Workload",
    "ErrorReport",
    "LevelVariance",
    "MECHANISMS",
    "mechanism_sigma",
    "synthetic_data",
    "exact_err_l2",
    "exact_err_worst_expected",
    "sample_uniform_range",
    "sample_uniform_ranges",
    "mc_errors",
    "variance_by_level",
]

MECHANISMS = ("correlated", "iid", "btree")

EXHAUSTIVE_MAX_N = 64  # all-ranges enumeration is offered only up to depth 6


@dataclass(eq=False)
class Workload:
    """A family of linear queries over an n-slot data vector.

    kinds: "continuous_all" (every consecutive range, n(n+1)/2 implicit
    rows), "nodal" (every subtree of the perfect binary tree, 2n-1 rows),
    "random" (count rows, each summing a uniform subset of between n/4
    and n slots), or "explicit" (a caller-supplied 0/1 matrix).
    """

    kind: str
    n: int
    count: int | None = None
    seed: int | None = None
    rows: np.ndarray | None = None

    @classmethod
    def continuous(cls, n: int) -> "Workload":
        return cls(kind="continuous_all", n=int(n))

    @classmethod
    def nodal(cls, n: int) -> "Workload":
        if not is_power_of_two(int(n)):
            raise ValueError("nodal workloads need n to be a power of two")
        return cls(kind="nodal", n=int(n))

    @classmethod
    def random(cls, n: int, count: int, seed: int) -> "Workload":
        if count < 1:
            raise ValueError("random workload needs count >= 1")
        return cls(kind="random", n=int(n), count=int(count), seed=int(seed))

    @classmethod
    def explicit(cls, rows) -> "Workload":
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        return cls(kind="explicit", n=rows.shape[1], rows=rows)

    @property
    def num_rows(self) -> int:
        if self.kind == "continuous_all":
            return self.n * (self.n + 1) // 2
        if self.kind == "nodal":
            return 2 * self.n - 1
        if self.kind == "random":
            return self.count
        return self.rows.shape[0]

    def ranges(self) -> tuple[np.ndarray, np.ndarray]:
        """All (lo, hi) rows for range-shaped kinds."""
        if self.kind == "continuous_all":
            lo, hi = np.triu_indices(self.n)
            return lo, hi
        if self.kind == "nodal":
            depth = self.n.bit_length() - 1
            pairs = [node_leaf_range(depth, m) for m in range(n_nodes(depth))]
            arr = np.asarray(pairs)
            return arr[:, 0], arr[:, 1]
        raise ValueError(f"workload kind {self.kind!r} is not range-shaped")

    def matrix(self) -> np.ndarray:
        """Materialized 0/1 workload matrix (small workloads only)."""
        if self.kind == "explicit":
            return self.rows
        if self.kind == "random":
            rng = np.random.default_rng(self.seed)
            w = np.zeros((self.count, self.n))
            lo_size = max(1, self.n // 4)
            for row in range(self.count):
                size = int(rng.integers(lo_size, self.n + 1))
                w[row, rng.choice(self.n, size=size, replace=False)] = 1.0
            return w
        lo, hi = self.ranges()
        if len(lo) > 500_000:
            raise ValueError(f"refusing to materialize {len(lo)} workload rows")
        w = np.zeros((len(lo), self.n))
        for row, (a, b) in enumerate(zip(lo, hi)):
            w[row, a : b + 1] = 1.0
        return w


@dataclass(frozen=True)
class ErrorReport:
    """Monte Carlo error estimates with per-metric standard errors."""

    err_l2: float
    err_worst_expected: float
    err_expected_worst: float
    stderr_l2: float
    stderr_worst_expected: float
    stderr_expected_worst: float
    replicates: int
    queries_sampled: int


@dataclass(frozen=True)
class LevelVariance:
    level: int
    mean_variance: float
    stderr: float


# ---------------------------------------------------------------------------
# shared pieces


def mechanism_sigma(mechanism: str, n: int, budget: PrivacyBudget) -> CalibratedSigma:
    """The scale each mechanism uses for an n-slot vector (after padding)."""
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}; expected one of {MECHANISMS}")
    padded = n if is_power_of_two(n) else next_power_of_two(n)
    depth = padded.bit_length() - 1
    if mechanism == "correlated":
        return calibrate_tree(padded, budget) if padded >= 2 else calibrate_iid(budget)
    if mechanism == "iid":
        return calibrate_iid(budget)
    return calibrate_general(depth + 1, budget)


def synthetic_data(n: int, rng) -> np.ndarray:
    """Uniform integer counts in 1..1000, the benchmark's data model."""
    rng, _ = as_generator(rng)
    return rng.integers(1, 1001, size=n).astype(np.float64)


def _unit_row_variances(workload: Workload, k: int, cap: int | None) -> np.ndarray:
    """Variance of each workload row under unit-scale correlated noise."""
    k = check_depth(k, minimum=1, cap=cap)
    n = 1 << k
    if workload.n != n:
        raise ValueError(f"workload is over {workload.n} slots but depth {k} has {n}")
    c = build_correlation(k, cap=cap)
    if workload.kind in ("continuous_all", "nodal"):
        prefix = range_variance_prefix(c)
        lo, hi = workload.ranges()
        return range_variance(prefix, lo, hi)
    w = workload.matrix()
    return np.einsum("ij,ij->i", w @ c, w)


def exact_err_l2(workload: Workload, k: int, sigma: float, *, cap: int | None = DEFAULT_DENSE_CAP) -> float:
    """Exact expected total squared error under correlated noise."""
    return float(sigma) ** 2 * float(_unit_row_variances(workload, k, cap).sum())


def exact_err_worst_expected(
    workload: Workload, k: int, sigma: float, *, cap: int | None = DEFAULT_DENSE_CAP
) -> float:
    """Exact worst-case expected error: sqrt(2/pi) * sigma * sqrt(max row variance)."""
    peak = float(_unit_row_variances(workload, k, cap).max())
    return math.sqrt(2.0 / math.pi) * float(sigma) * math.sqrt(peak)


# ---------------------------------------------------------------------------
# uniform range sampling


def sample_uniform_ranges(n: int, rng, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized uniform draws over all n(n+1)/2 consecutive ranges.

    A coin with head probability 2/(n+1) selects a singleton at a uniform
    index; otherwise two distinct uniform indices bound the range.  Every
    range then has probability 2/(n(n+1)).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng, _ = as_generator(rng)
    heads = rng.random(size) < 2.0 / (n + 1)
    a = rng.integers(0, n, size=size)
    b = rng.integers(0, n - 1, size=size) if n > 1 else np.zeros(size, dtype=np.int64)
    b = b + (b >= a)  # distinct-pair trick keeps the pair uniform
    lo = np.where(heads, a, np.minimum(a, b))
    hi = np.where(heads, a, np.maximum(a, b))
    return lo, hi


def sample_uniform_range(n: int, rng) -> RangeQuery:
    """One uniform draw over all consecutive ranges."""
    lo, hi = sample_uniform_ranges(n, rng, 1)
    return RangeQuery(int(lo[0]), int(hi[0]))


# ---------------------------------------------------------------------------
# Monte Carlo estimation


def _range_panel_errors(
    mechanism: str,
    x: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    budget: PrivacyBudget,
    replicates: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Errors of the panel's range answers, shape (replicates, panel)."""
    n = x.size
    padded = n if is_power_of_two(n) else next_power_of_two(n)
    depth = padded.bit_length() - 1
    cal = mechanism_sigma(mechanism, n, budget)

    if mechanism == "btree":
        x_padded = np.zeros(padded)
        x_padded[:n] = x
        sums = subtree_sums(x_padded)
        noisy = sums + rng.normal(0.0, cal.sigma, size=(replicates, sums.size))
        covers = [range_decompose(depth, RangeQuery(int(a), int(b))) for a, b in zip(lo, hi)]
        true = np.array([sums[ids].sum() for ids in covers])
        errors = np.empty((replicates, len(covers)))
        for col, ids in enumerate(covers):
            errors[:, col] = noisy[:, ids].sum(axis=1) - true[col]
        return errors

    if mechanism == "correlated":
        noise = cascade_leaf_batch(depth, cal.sigma, rng, replicates)[:, :n]
    else:
        noise = rng.normal(0.0, cal.sigma, size=(replicates, n))
    priv = x[np.newaxis, :] + noise
    prefix = np.concatenate([np.zeros((replicates, 1)), np.cumsum(priv, axis=1)], axis=1)
    true_prefix = np.concatenate([[0.0], np.cumsum(x)])
    answers = prefix[:, hi + 1] - prefix[:, lo]
    return answers - (true_prefix[hi + 1] - true_prefix[lo])


def _matrix_panel_errors(
    mechanism: str,
    x: np.ndarray,
    w: np.ndarray,
    budget: PrivacyBudget,
    replicates: int,
    rng: np.random.Generator,
) -> np.ndarray:
    n = x.size
    padded = n if is_power_of_two(n) else next_power_of_two(n)
    depth = padded.bit_length() - 1
    cal = mechanism_sigma(mechanism, n, budget)
    if mechanism == "correlated":
        noise = cascade_leaf_batch(depth, cal.sigma, rng, replicates)[:, :n]
    elif mechanism == "iid":
        noise = rng.normal(0.0, cal.sigma, size=(replicates, n))
    else:
        # non-contiguous rows: the tree release answers them from its noisy leaves
        noise = rng.normal(0.0, cal.sigma, size=(replicates, padded))[:, :n]
    return ((x[np.newaxis, :] + noise) @ w.T) - (w @ x)[np.newaxis, :]


def mc_errors(
    mechanism: str,
    workload: Workload,
    budget: PrivacyBudget,
    replicates: int,
    queries_per_replicate: int,
    rng,
    *,
    exhaustive: bool = False,
    data: np.ndarray | None = None,
) -> ErrorReport:
    """Monte Carlo estimates of all three error metrics.

    A uniform query panel is drawn once and held fixed across replicates
    (enumerable workloads use every query; --exhaustive forces full
    enumeration of continuous ranges up to n = 64).  Each replicate
    perturbs the data with fresh noise and answers the panel.  The total
    squared error estimate is scaled by the full workload row count, per
    query, so it is unbiased however many queries are sampled.  The
    worst-expected estimate maximizes per-query mean absolute errors over
    the panel, which carries a small selection bias on sampled panels;
    exhaustive mode removes the panel-coverage part of that bias.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    if queries_per_replicate < 1:
        raise ValueError("need at least 1 query per replicate")
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    rng, _ = as_generator(rng)
    n = workload.n
    x = synthetic_data(n, rng) if data is None else check_data_vector(data)
    if x.size != n:
        raise ValueError(f"data has {x.size} slots, workload expects {n}")

    if workload.kind == "continuous_all":
        if exhaustive:
            if n > EXHAUSTIVE_MAX_N:
                raise ValueError(f"exhaustive mode is capped at n = {EXHAUSTIVE_MAX_N}")
            lo, hi = workload.ranges()
        else:
            lo, hi = sample_uniform_ranges(n, rng, queries_per_replicate)
        errors = _range_panel_errors(mechanism, x, lo, hi, budget, replicates, rng)
    elif workload.kind == "nodal":
        lo, hi = workload.ranges()
        errors = _range_panel_errors(mechanism, x, lo, hi, budget, replicates, rng)
    else:
        w = workload.matrix()
        errors = _matrix_panel_errors(mechanism, x, w, budget, replicates, rng)

    panel = errors.shape[1]
    total_rows = workload.num_rows

    per_rep_l2 = total_rows * np.mean(errors**2, axis=1)
    per_rep_max = np.max(np.abs(errors), axis=1)
    per_query_mean_abs = np.mean(np.abs(errors), axis=0)
    worst_q = int(np.argmax(per_query_mean_abs))

    root_r = math.sqrt(replicates)
    return ErrorReport(
        err_l2=float(per_rep_l2.mean()),
        err_worst_expected=float(per_query_mean_abs[worst_q]),
        err_expected_worst=float(per_rep_max.mean()),
        stderr_l2=float(per_rep_l2.std(ddof=1) / root_r),
        stderr_worst_expected=float(np.abs(errors[:, worst_q]).std(ddof=1) / root_r),
        stderr_expected_worst=float(per_rep_max.std(ddof=1) / root_r),
        replicates=int(replicates),
        queries_sampled=int(panel),
    )


# ---------------------------------------------------------------------------
# per-level variance profiles


def variance_by_level(
    mechanism: str,
    k: int,
    budget: PrivacyBudget,
    replicates: int,
    rng,
    *,
    batches: int = 10,
) -> list[LevelVariance]:
    """Empirical answer variance of the dyadic ranges at each tree level.

    Level 0 is the root.  Per level, the per-node answer variances are
    averaged; standard errors come from splitting the replicates into
    independent batches.  The correlated mechanism and the tree release
    are flat across levels; independent noise grows by 2^(k - level).
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates for level profiles")
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    k = check_depth(k, minimum=1)
    rng, _ = as_generator(rng)
    n = 1 << k
    x = synthetic_data(n, rng)
    cal = mechanism_sigma(mechanism, n, budget)

    if mechanism == "btree":
        answers_by_node = subtree_sums(x)[np.newaxis, :] + rng.normal(
            0.0, cal.sigma, size=(replicates, n_nodes(k))
        )
    else:
        if mechanism == "correlated":
            noise = cascade_leaf_batch(k, cal.sigma, rng, replicates)
        else:
            noise = rng.normal(0.0, cal.sigma, size=(replicates, n))
        prefix = np.concatenate(
            [np.zeros((replicates, 1)), np.cumsum(x[np.newaxis, :] + noise, axis=1)], axis=1
        )
        spans = [node_leaf_range(k, m) for m in range(n_nodes(k))]
        lo = np.array([s[0] for s in spans])
        hi = np.array([s[1] for s in spans])
        answers_by_node = prefix[:, hi + 1] - prefix[:, lo]

    group_size = replicates // batches
    if group_size < 2:
        raise ValueError("too few replicates per batch; lower `batches`")
    out = []
    for level in range(k + 1):
        start, stop = (1 << level) - 1, (1 << (level + 1)) - 1
        node_answers = answers_by_node[: group_size * batches, start:stop]
        grouped = node_answers.reshape(batches, group_size, stop - start)
        group_means = grouped.var(axis=1, ddof=1).mean(axis=1)
        out.append(
            LevelVariance(
                level=level,
                mean_variance=float(group_means.mean()),
                stderr=float(group_means.std(ddof=1) / math.sqrt(batches)),
            )
        )
    return out
