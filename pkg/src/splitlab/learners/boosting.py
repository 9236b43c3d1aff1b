"""Gradient-boosted regression trees under logistic loss."""

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_binary_xy, check_features
from ._kernels import grow_newton_tree
from .tree import TreeArrays


def logistic_loss(y01, score):
    """Mean negative log-likelihood of labels ``y01`` under raw scores."""
    # log(1 + exp(s)) - y * s, written to stay finite for large |s|
    return float(np.mean(np.logaddexp(0.0, score) - y01 * score))


class GradientBoostingClassifier(ClassifierMixin, BaseEstimator):
    """Binary gradient boosting with Newton-step leaves.

    The model starts from the log-odds of the positive class and adds
    ``n_estimators`` shrunken depth-limited trees, each fitted to the
    negative gradient ``y - p`` of the logistic loss.

    ``random_state`` is accepted for interface symmetry; fitting is fully
    deterministic because every node searches all predictors.
    """

    def __init__(self, n_estimators=200, learning_rate=0.1, max_depth=3,
                 min_samples_leaf=1, random_state=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y01, classes = check_binary_xy(X, y)
        prevalence = y01.mean()
        self.init_score_ = float(np.log(prevalence / (1.0 - prevalence)))
        score = np.full(X.shape[0], self.init_score_)
        self.estimators_ = []
        self.train_loss_ = [logistic_loss(y01, score)]
        depth = -1 if self.max_depth is None else int(self.max_depth)
        for _ in range(self.n_estimators):
            p = expit(score)
            tree = TreeArrays(*grow_newton_tree(
                X, y01 - p, p * (1.0 - p), depth, int(self.min_samples_leaf)))
            self.estimators_.append(tree)
            score = score + self.learning_rate * tree.predict_value(X)
            self.train_loss_.append(logistic_loss(y01, score))
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return self

    def staged_decision_function(self, X):
        """Yield the raw score after each stage (stage 1 first)."""
        check_is_fitted(self, "estimators_")
        X = check_features(X, self.n_features_in_)
        score = np.full(X.shape[0], self.init_score_)
        for tree in self.estimators_:
            score = score + self.learning_rate * tree.predict_value(X)
            yield score

    def decision_function(self, X):
        check_is_fitted(self, "estimators_")
        X = check_features(X, self.n_features_in_)
        score = np.full(X.shape[0], self.init_score_)
        for tree in self.estimators_:
            score += self.learning_rate * tree.predict_value(X)
        return score

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return self.classes_[(self.predict_proba(X)[:, 1] >= 0.5).astype(int)]

    def to_dict(self):
        check_is_fitted(self, "estimators_")
        return {
            "kind": "gradient_boosting",
            "init_score": self.init_score_,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.estimators_],
        }


def gbt_fit(rows, labels, n_stages=200, learning_rate=0.1, max_depth=3, seed=0):
    return GradientBoostingClassifier(
        n_estimators=n_stages, learning_rate=learning_rate, max_depth=max_depth,
        random_state=seed,
    ).fit(rows, labels)


def gbt_predict_proba(model, rows):
    """P(positive class) per row."""
    return model.predict_proba(rows)[:, 1]
