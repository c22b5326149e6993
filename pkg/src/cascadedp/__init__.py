"""Differentially private range queries with correlated input perturbation.

The package privatizes a histogram by adding jointly Gaussian noise whose
covariance is built on a binary-tree hierarchy: every subtree sum carries
the same noise variance, answers stay unbiased and internally consistent,
and the full noise law is public.  Sampling the correlated noise costs
linear time via top-down cascade splitting.

Main entry points: the scikit-learn style transformers
(CorrelatedPerturbation, IIDGaussianPerturbation, BinaryTreePerturbation),
the functional mechanism layer (perturb / answer_range), calibration
(calibrate_tree and friends), and the benchmark metrics (mc_errors,
exact_err_l2, variance_by_level).  The `cascadedp` CLI drives seeded,
reproducible experiment runs.
"""

__version__ = "0.1.0"

from .baselines import BinaryTreeRelease, bt_answer_range, bt_perturb, iid_perturb
from .correlation import (
    DEFAULT_DENSE_CAP,
    build_correlation,
    build_precision,
    max_range_variance,
    precision_diag_max,
)
from .estimators import BinaryTreePerturbation, CorrelatedPerturbation, IIDGaussianPerturbation
from .grid import NoiseGrid2D, sample_2d
from .mechanism import PrivatizedVector, RangeQuery, answer_range, perturb, range_decompose
from .metrics import (
    ErrorReport,
    Workload,
    exact_err_l2,
    exact_err_worst_expected,
    mc_errors,
    sample_uniform_range,
    variance_by_level,
)
from .privacy import CalibratedSigma, PrivacyBudget, calibrate_general, calibrate_iid, calibrate_tree
from .sampler import NoiseTree, cascade_sample, cholesky_reference_sample, split_node
from .streaming import CascadeStream, StreamState, stream_next
from .trees import GeneralTree, general_tree_sample

__all__ = [
    "__version__",
    "BinaryTreePerturbation",
    "BinaryTreeRelease",
    "CalibratedSigma",
    "CascadeStream",
    "CorrelatedPerturbation",
    "DEFAULT_DENSE_CAP",
    "ErrorReport",
    "GeneralTree",
    "IIDGaussianPerturbation",
    "NoiseGrid2D",
    "NoiseTree",
    "PrivacyBudget",
    "PrivatizedVector",
    "RangeQuery",
    "StreamState",
    "Workload",
    "answer_range",
    "bt_answer_range",
    "bt_perturb",
    "build_correlation",
    "build_precision",
    "calibrate_general",
    "calibrate_iid",
    "calibrate_tree",
    "cascade_sample",
    "cholesky_reference_sample",
    "exact_err_l2",
    "exact_err_worst_expected",
    "general_tree_sample",
    "iid_perturb",
    "max_range_variance",
    "mc_errors",
    "perturb",
    "precision_diag_max",
    "range_decompose",
    "sample_2d",
    "sample_uniform_range",
    "split_node",
    "stream_next",
    "variance_by_level",
]
