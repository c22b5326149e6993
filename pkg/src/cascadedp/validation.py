"""Shared input-validation helpers.

All validation failures raise ValueError so callers (library users, the
estimator layer, and the CLI) get one predictable exception class.
"""

from __future__ import annotations

import numpy as np

# Largest depth for which dense 2^k x 2^k matrices are materialized.
# n = 4096 keeps one float64 matrix at 128 MB.
DEFAULT_DENSE_CAP = 12


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    if n < 1:
        raise ValueError(f"need a positive length, got {n}")
    return 1 << (n - 1).bit_length()


def check_depth(k: int, *, minimum: int = 0, cap: int | None = None) -> int:
    """Validate a tree depth, optionally against a dense cap."""
    k = int(k)
    if k < minimum:
        raise ValueError(f"tree depth must be >= {minimum}, got {k}")
    if cap is not None and k > cap:
        raise ValueError(
            f"tree depth {k} exceeds the dense cap {cap}; dense operations "
            f"materialize a 2^k x 2^k matrix"
        )
    return k


def check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"sigma must be finite and > 0, got {sigma}")
    return sigma


def check_data_vector(x) -> np.ndarray:
    """Coerce to a 1-D float64 array of finite entries."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"data must be a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data vector contains non-finite entries")
    return x


def as_generator(rng) -> tuple[np.random.Generator, int | None]:
    """Coerce an int seed or Generator into a Generator.

    Returns the generator and, when the caller passed a seed, that seed
    (so it can be recorded in output metadata).  Objects exposing a
    Generator-compatible `normal` method pass through untouched, which
    lets instrumented or counting generators drive the samplers.
    """
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    if rng is None:
        return np.random.default_rng(), None
    if hasattr(rng, "normal"):
        return rng, None
    raise ValueError(f"expected an int seed, numpy Generator, or None, got {type(rng)!r}")


def spawn_generators(seed, count: int) -> list[np.random.Generator]:
    """Independent per-replicate generators derived from (seed, index)."""
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(count)]
