"""k-means: k-means++ seeding, Lloyd iterations, then Hartigan single-point moves."""

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features, check_seed
from .exceptions import ConfigError


def _sq_dists(X, centers):
    # |x|^2 - 2 x.c + |c|^2, clipped against cancellation
    d = (X * X).sum(1)[:, None] - 2.0 * X @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plusplus(X, k, rng):
    """Classic D^2-weighted seeding."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            i = int(rng.integers(n))
        else:
            i = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            i = min(i, n - 1)
        centers[j] = X[i]
        closest = np.minimum(closest, _sq_dists(X, centers[j:j + 1])[:, 0])
    return centers


def _fill_empty(X, labels, centers, k):
    """Move the farthest points into empty clusters so every label is used."""
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels, centers
    labels = labels.copy()
    centers = centers.copy()
    dist = ((X - centers[labels]) ** 2).sum(1)
    # stable order so ties go to the lowest row index
    order = np.argsort(-dist, kind="stable")
    taken = 0
    for j in empty:
        while True:
            i = order[taken]
            taken += 1
            if counts[labels[i]] > 1:
                break
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] = 1
        centers[j] = X[i]
    return labels, centers


@njit(cache=True, nogil=True)
def nearest_center(X, centers):
    """Index of the closest center per row (lowest index on ties)."""
    n, d = X.shape
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = np.inf
        for c in range(centers.shape[0]):
            dist = 0.0
            for j in range(d):
                dist += (X[i, j] - centers[c, j]) ** 2
            if dist < best:
                best = dist
                labels[i] = c
    return labels


@njit(cache=True, nogil=True)
def _means(X, labels, k):
    # rows are summed in index order, so the reduction order is fixed
    sums = np.zeros((k, X.shape[1]))
    counts = np.zeros(k)
    for i in range(X.shape[0]):
        counts[labels[i]] += 1.0
        for j in range(X.shape[1]):
            sums[labels[i], j] += X[i, j]
    for c in range(k):
        for j in range(X.shape[1]):
            sums[c, j] /= counts[c]
    return sums


@njit(cache=True, nogil=True)
def hartigan_refine(X, labels, max_passes=100):
    """Move single points between clusters while that lowers the total WCSS.

    Moving ``x`` from cluster a (size n_a, centroid c_a) to b changes the
    WCSS by ``n_b / (n_b + 1) |x - c_b|^2 - n_a / (n_a - 1) |x - c_a|^2``.
    Points are visited in index order and centroids updated after every
    move, so the result is deterministic. Returns ``(labels, centroids)``.
    """
    n, d = X.shape
    k = labels.max() + 1
    labels = labels.copy()
    counts = np.zeros(k, dtype=np.int64)
    centers = np.zeros((k, d))
    for i in range(n):
        counts[labels[i]] += 1
        for j in range(d):
            centers[labels[i], j] += X[i, j]
    for c in range(k):
        for j in range(d):
            centers[c, j] /= counts[c]
    for _ in range(max_passes):
        moved = False
        for i in range(n):
            a = labels[i]
            if counts[a] <= 1:
                continue
            da = 0.0
            for j in range(d):
                da += (X[i, j] - centers[a, j]) ** 2
            remove = da * counts[a] / (counts[a] - 1)
            best = remove
            best_c = a
            for c in range(k):
                if c == a:
                    continue
                dc = 0.0
                for j in range(d):
                    dc += (X[i, j] - centers[c, j]) ** 2
                add = dc * counts[c] / (counts[c] + 1)
                if add < best - 1e-12 * (1.0 + best):
                    best = add
                    best_c = c
            if best_c == a:
                continue
            b = best_c
            for j in range(d):
                centers[a, j] = (centers[a, j] * counts[a] - X[i, j]) / (counts[a] - 1)
                centers[b, j] = (centers[b, j] * counts[b] + X[i, j]) / (counts[b] + 1)
            counts[a] -= 1
            counts[b] += 1
            labels[i] = b
            moved = True
        if not moved:
            break
    return labels, centers


def _lloyd(X, k, rng, max_iter, tol):
    centers = kmeans_plusplus(X, k, rng)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels, centers = _fill_empty(X, nearest_center(X, centers), centers, k)
        new_centers = _means(X, labels, k)
        shift = np.sqrt(((new_centers - centers) ** 2).sum(1)).max()
        centers = new_centers
        if shift < tol:
            break
    labels, centers = _fill_empty(X, nearest_center(X, centers), centers, k)
    labels, centers = hartigan_refine(X, labels)
    return labels, centers, n_iter


def kmeans_fit(points, k, seed=0, max_iter=300, tol=1e-6, n_init=10):
    """Cluster ``points`` into ``k`` non-empty groups.

    Each of ``n_init`` restarts seeds with k-means++, runs Lloyd iterations
    until no centroid moves more than ``tol`` (or ``max_iter`` rounds), then
    polishes with Hartigan moves. The restart with the lowest within-cluster
    sum of squares wins, the earliest on ties.

    Returns ``(labels, centroids, n_iter)``.
    """
    X = np.ascontiguousarray(points, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in [1, {n}] for {n} points, got {k}")
    if n_init < 1:
        raise ConfigError(f"n_init must be >= 1, got {n_init}")
    rng = np.random.default_rng(check_seed(seed))
    best = None
    for _ in range(n_init):
        labels, centers, n_iter = _lloyd(X, k, rng, max_iter, tol)
        score = inertia(X, labels, centers)
        if best is None or score < best[0]:
            best = (score, labels, centers, n_iter)
    return best[1], best[2], best[3]


def inertia(X, labels, centers):
    """Within-cluster sum of squared distances."""
    return float(((np.asarray(X) - centers[labels]) ** 2).sum())


class KMeans(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`kmeans_fit`."""

    def __init__(self, n_clusters=10, n_init=10, max_iter=300, tol=1e-6, random_state=None):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_features(X)
        self.labels_, self.cluster_centers_, self.n_iter_ = kmeans_fit(
            X, self.n_clusters, self.random_state, self.max_iter, self.tol, self.n_init)
        self.inertia_ = inertia(X, self.labels_, self.cluster_centers_)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        return nearest_center(check_features(X, self.n_features_in_), self.cluster_centers_)
