"""Scikit-learn style transformers wrapping the perturbation mechanisms.

Each transformer treats a row of X as one confidential histogram and
returns the privatized rows.  fit validates the privacy budget, fixes the
tree layout from the column count, calibrates the noise scale, and seeds
the noise stream; transform draws fresh noise on every call (two
transforms are two releases, each spending the configured budget).
Refitting with the same random_state resets the stream, so fitted
pipelines are reproducible.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .baselines import subtree_sums
from .privacy import PrivacyBudget, calibrate_general, calibrate_iid, calibrate_tree
from .sampler import cascade_leaf_batch, n_nodes
from .validation import is_power_of_two, next_power_of_two

__all__ = ["CorrelatedPerturbation", "IIDGaussianPerturbation", "BinaryTreePerturbation"]


class _PerturbationBase(TransformerMixin, BaseEstimator):
    def __init__(self, epsilon=1.0, delta=1e-6, random_state=None):
        self.epsilon = epsilon
        self.delta = delta
        self.random_state = random_state

    def _check_X(self, X, *, reset: bool):
        arr = check_array(np.atleast_2d(X), dtype=np.float64, ensure_all_finite=True)
        if not reset and arr.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {arr.shape[1]} features, but this mechanism was fitted with "
                f"{self.n_features_in_}"
            )
        return arr

    def fit(self, X, y=None):
        X = self._check_X(X, reset=True)
        self.n_features_in_ = X.shape[1]
        self.padded_n_ = (
            self.n_features_in_
            if is_power_of_two(self.n_features_in_)
            else next_power_of_two(self.n_features_in_)
        )
        self.depth_ = self.padded_n_.bit_length() - 1
        budget = PrivacyBudget(self.epsilon, self.delta)
        self.sigma_ = self._calibrate(budget).sigma
        seed = self.random_state
        if isinstance(seed, np.random.Generator):
            self.random_state_ = seed
        else:
            self.random_state_ = np.random.default_rng(seed)
        return self

    def transform(self, X):
        check_is_fitted(self, "sigma_")
        X = self._check_X(X, reset=False)
        out = self._release(X)
        return out

    def _calibrate(self, budget):
        raise NotImplementedError

    def _release(self, X):
        raise NotImplementedError


class CorrelatedPerturbation(_PerturbationBase):
    """Input perturbation with negatively correlated tree noise.

    Every subtree sum of the privatized histogram has the same noise
    variance sigma_^2, range answers are internally consistent, and the
    release stays unbiased with a closed-form Gaussian law.
    """

    def _calibrate(self, budget):
        return calibrate_tree(self.padded_n_, budget) if self.padded_n_ >= 2 else calibrate_iid(budget)

    def _release(self, X):
        noise = cascade_leaf_batch(self.depth_, self.sigma_, self.random_state_, X.shape[0])
        return X + noise[:, : self.n_features_in_]


class IIDGaussianPerturbation(_PerturbationBase):
    """Input perturbation with independent per-slot Gaussian noise."""

    def _calibrate(self, budget):
        return calibrate_iid(budget)

    def _release(self, X):
        return X + self.random_state_.normal(0.0, self.sigma_, size=X.shape)


class BinaryTreePerturbation(_PerturbationBase):
    """Noisy hierarchical sums: transform returns 2^(depth+1) - 1 columns.

    Output column m is the true subtree sum of node m plus independent
    noise, in level-order layout.  Unlike the input-perturbation
    transformers, parents do not equal the sum of their children.
    """

    def _calibrate(self, budget):
        return calibrate_general(self.depth_ + 1, budget)

    def _release(self, X):
        padded = np.zeros((X.shape[0], self.padded_n_))
        padded[:, : self.n_features_in_] = X
        sums = np.apply_along_axis(subtree_sums, 1, padded)
        return sums + self.random_state_.normal(0.0, self.sigma_, size=(X.shape[0], n_nodes(self.depth_)))
