"""Binary decision trees grown by the compiled kernels."""

from dataclasses import dataclass
from math import floor, sqrt

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_binary_xy, check_features, check_seed
from ._kernels import LEAF, grow_classification_tree, tree_apply


@dataclass(frozen=True)
class TreeArrays:
    """Flat array representation of a fitted tree."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_node_samples: np.ndarray
    depth: np.ndarray

    @property
    def node_count(self):
        return self.feature.shape[0]

    @property
    def max_depth(self):
        return int(self.depth.max())

    def is_leaf(self, node):
        return self.feature[node] == LEAF

    def apply(self, X):
        return tree_apply(X, self.feature, self.threshold, self.left, self.right)

    def predict_value(self, X):
        return self.value[self.apply(X)]

    def to_dict(self):
        """Nested node dict for JSON inspection."""

        def node(i):
            if self.feature[i] == LEAF:
                return {"leaf": float(self.value[i]), "samples": int(self.n_node_samples[i])}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "samples": int(self.n_node_samples[i]),
                "left": node(self.left[i]),
                "right": node(self.right[i]),
            }

        return node(0)


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(floor(sqrt(n_features))))
    k = int(max_features)
    if not 1 <= k <= n_features:
        raise ValueError(f"max_features must be in [1, {n_features}], got {k}")
    return k


def grow_tree(X, y01, sample_idx, rng, max_depth, min_samples_leaf, max_features):
    """Grow one classification tree; randomness comes only from ``rng``."""
    n_features = X.shape[1]
    keys = rng.random((2 * sample_idx.shape[0] + 1, n_features))
    depth = -1 if max_depth is None else int(max_depth)
    return TreeArrays(*grow_classification_tree(
        X, y01, sample_idx.astype(np.int64), keys, depth, int(min_samples_leaf),
        resolve_max_features(max_features, n_features),
    ))


class DecisionTreeClassifier(ClassifierMixin, BaseEstimator):
    """Gini-impurity binary tree with Laplace-smoothed leaf probabilities.

    Parameters
    ----------
    max_depth : int or None
        Maximum depth; None grows until leaves are pure.
    min_samples_leaf : int
        Minimum number of samples on each side of a split.
    max_features : int, "sqrt" or None
        Number of non-constant features searched per node. None uses all.
    random_state : int or None
        Seed for the per-node feature ordering.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None,
                 random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y01, classes = check_binary_xy(X, y)
        rng = np.random.default_rng(check_seed(self.random_state))
        self.tree_ = grow_tree(X, y01, np.arange(X.shape[0]), rng, self.max_depth,
                               self.min_samples_leaf, self.max_features)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "tree_")
        p = self.tree_.predict_value(check_features(X, self.n_features_in_))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return self.classes_[(self.predict_proba(X)[:, 1] >= 0.5).astype(int)]
