"""Train/test divergence diagnostics and 2-D PCA projections."""

import csv
import statistics
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features, check_seed
from .exceptions import DegenerateDataError, DiagnosticError
from .learners import RandomForestClassifier

REAL = 1
PERMUTED = 0
PCA_HEADER = ("pc1", "pc2", "label", "capture", "split_side")


def permute_columns(X, rng):
    """Copy of ``X`` with every column shuffled independently."""
    out = np.empty_like(X)
    for j in range(X.shape[1]):
        out[:, j] = X[rng.permutation(X.shape[0]), j]
    return out


class PermutationSimilarity(BaseEstimator):
    """Real-versus-permuted classifier over a training set.

    ``fit`` labels the training rows REAL and a column-permuted copy
    PERMUTED, then trains ``estimator`` (a default random forest when None)
    to tell them apart. Rows scored below ``threshold`` for REAL count as
    not recognized.
    """

    def __init__(self, estimator=None, threshold=0.5, random_state=None):
        self.estimator = estimator
        self.threshold = threshold
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_features(X)
        if X.shape[0] < 10:
            raise DiagnosticError(f"the diagnostic needs >= 10 training rows, got {X.shape[0]}")
        if np.all(X == X[0]):
            raise DiagnosticError("all training rows are identical; real and permuted rows coincide")
        seed = check_seed(self.random_state)
        rng = np.random.default_rng(seed)
        permuted = permute_columns(X, rng)
        stacked = np.vstack([X, permuted])
        target = np.concatenate([np.full(X.shape[0], REAL), np.full(X.shape[0], PERMUTED)])
        est = self.estimator if self.estimator is not None else RandomForestClassifier(random_state=seed)
        self.estimator_ = est.fit(stacked, target)
        self.n_features_in_ = X.shape[1]
        return self

    def proba_real(self, X):
        check_is_fitted(self, "estimator_")
        X = check_features(X, self.n_features_in_)
        col = list(self.estimator_.classes_).index(REAL)
        return self.estimator_.predict_proba(X)[:, col]

    def not_recognized_fraction(self, X):
        return float(np.mean(self.proba_real(X) < self.threshold))


def similarity_diagnostic(train_X, test_X, seed=0):
    """Fraction of ``test_X`` rows not recognized as drawn like ``train_X``."""
    test_X = np.asarray(test_X, dtype=np.float64)
    if test_X.shape[0] < 1:
        raise DiagnosticError("the diagnostic needs >= 1 test row")
    return PermutationSimilarity(random_state=seed).fit(train_X).not_recognized_fraction(test_X)


@dataclass(frozen=True)
class SimilarityReport:
    """Not-recognized fractions over repeats, with mean and sample stddev."""

    fractions: tuple
    mean: float
    sd: float

    @classmethod
    def from_fractions(cls, fractions):
        fractions = tuple(float(f) for f in fractions)
        if not fractions:
            raise ValueError("no fractions to summarize")
        sd = statistics.stdev(fractions) if len(fractions) > 1 else 0.0
        return cls(fractions, statistics.fmean(fractions), sd)

    @property
    def not_recognized_fraction(self):
        return self.mean

    def to_dict(self):
        return {"not_recognized_fraction": self.mean, "sd": self.sd,
                "per_repeat": list(self.fractions)}


class PCA(TransformerMixin, BaseEstimator):
    """Principal components of the population covariance.

    Each component's sign is fixed so that its largest-magnitude coordinate
    is positive. Raises :class:`DegenerateDataError` when the data has fewer
    than ``n_components`` directions of non-zero variance.
    """

    def __init__(self, n_components=2, rank_tol=1e-12):
        self.n_components = n_components
        self.rank_tol = rank_tol

    def fit(self, X, y=None):
        X = check_features(X)
        if X.shape[0] < 3:
            raise DegenerateDataError(f"PCA needs >= 3 rows, got {X.shape[0]}")
        if X.shape[1] < self.n_components:
            raise DegenerateDataError(f"cannot take {self.n_components} components of {X.shape[1]} predictors")
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / X.shape[0]
        eigval, eigvec = np.linalg.eigh(cov)
        order = np.argsort(eigval)[::-1]
        eigval = np.clip(eigval[order], 0.0, None)
        eigvec = eigvec[:, order]
        total = eigval.sum()
        if total <= 0 or eigval[self.n_components - 1] <= self.rank_tol * total:
            raise DegenerateDataError(f"data has rank < {self.n_components}")
        comps = eigvec[:, :self.n_components].T.copy()
        for c in comps:
            if c[np.argmax(np.abs(c))] < 0:
                c *= -1.0
        self.components_ = comps
        self.explained_variance_ = eigval[:self.n_components]
        self.explained_variance_ratio_ = eigval[:self.n_components] / total
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        return (check_features(X, self.n_features_in_) - self.mean_) @ self.components_.T

    @property
    def component_1(self):
        return self.components_[0]

    @property
    def component_2(self):
        return self.components_[1]


def pca_fit(rows):
    return PCA(n_components=2).fit(rows)


def pca_project(model, rows):
    return model.transform(rows)


def write_pca_csv(sink, coords, labels, captures, sides):
    """Plot-ready projection rows: pc1, pc2, label, capture, split_side."""
    from .data import ClassLabel

    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(PCA_HEADER)
    for (a, b), lab, cap, side in zip(coords, labels, captures, sides):
        writer.writerow([repr(float(a)), repr(float(b)), str(ClassLabel(int(lab))), cap, side])
