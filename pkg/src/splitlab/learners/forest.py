"""Random forest of bootstrapped Gini trees."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_binary_xy, check_features, check_seed
from .tree import DecisionTreeClassifier, grow_tree


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    """Bagged ensemble of :class:`DecisionTreeClassifier`.

    Each tree sees a bootstrap resample of the training rows and searches
    ``max_features`` randomly ordered predictors per node. Tree seeds are
    drawn from ``random_state`` up front, so results do not depend on
    ``n_jobs``.
    """

    def __init__(self, n_estimators=100, max_depth=None, min_samples_leaf=1,
                 max_features="sqrt", random_state=None, n_jobs=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y01, classes = check_binary_xy(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        n = X.shape[0]
        master = np.random.default_rng(check_seed(self.random_state))
        self.tree_seeds_ = master.integers(0, 2**63 - 1, size=self.n_estimators, dtype=np.int64)

        def build(seed):
            rng = np.random.default_rng(int(seed))
            boot = rng.integers(0, n, size=n)
            tree = DecisionTreeClassifier(
                max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf,
                max_features=self.max_features, random_state=int(seed),
            )
            tree.tree_ = grow_tree(X, y01, boot, rng, self.max_depth,
                                   self.min_samples_leaf, self.max_features)
            tree.classes_ = classes
            tree.n_features_in_ = X.shape[1]
            return tree

        n_jobs = self.n_jobs or 1
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                self.estimators_ = list(pool.map(build, self.tree_seeds_))
        else:
            self.estimators_ = [build(s) for s in self.tree_seeds_]
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "estimators_")
        X = check_features(X, self.n_features_in_)
        p = np.zeros(X.shape[0])
        for tree in self.estimators_:
            p += tree.tree_.predict_value(X)
        p /= len(self.estimators_)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return self.classes_[(self.predict_proba(X)[:, 1] >= 0.5).astype(int)]

    def to_dict(self):
        check_is_fitted(self, "estimators_")
        return {
            "kind": "random_forest",
            "classes": [c.item() if hasattr(c, "item") else c for c in self.classes_],
            "trees": [t.tree_.to_dict() for t in self.estimators_],
        }


def forest_fit(rows, labels, n_trees=100, max_depth=None, min_leaf=1,
               features_per_split="sqrt", seed=0):
    return RandomForestClassifier(
        n_estimators=n_trees, max_depth=max_depth, min_samples_leaf=min_leaf,
        max_features=features_per_split, random_state=seed,
    ).fit(rows, labels)


def forest_predict_proba(model, rows):
    """P(positive class) per row."""
    return model.predict_proba(rows)[:, 1]
