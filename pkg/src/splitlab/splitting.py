"""Train/test splitting strategies.

Every strategy is a pure function of ``(dataset, config, repeat)``. The
random stream is ``default_rng([seed, repeat])`` for all of them, so the
Monte Carlo and dissimilarity strategies draw the same training rows for
the same seed and repeat.
"""

import json
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from ._validation import check_seed
from .cluster import kmeans_fit
from .data import StandardizationParams, standardize
from .exceptions import ConfigError, PartitionError


class Strategy(str, Enum):
    MONTE_CARLO = "monte_carlo"
    DISSIMILARITY = "dissimilarity"
    INFORMED = "informed"
    CLUSTERING = "clustering"

    def __str__(self):
        return self.value


class Aggregation(str, Enum):
    MEAN = "mean"
    MIN = "min"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SplitConfig:
    n_train: int = 2000
    n_test: int = 1000
    seed: int = 0
    strategy: Strategy = Strategy.MONTE_CARLO
    aggregation: Aggregation = Aggregation.MEAN
    n_clusters: int = 10
    n_seed_points: int = 1
    max_group_shuffles: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "aggregation", Aggregation(self.aggregation))
        check_seed(self.seed)
        if self.n_train < 2 or self.n_test < 1:
            raise ConfigError(f"need n_train >= 2 and n_test >= 1, got {self.n_train}/{self.n_test}")
        if self.n_clusters < 1 or self.n_seed_points < 1:
            raise ConfigError("n_clusters and n_seed_points must be >= 1")

    def check_feasible(self, n_rows):
        if self.n_train + self.n_test > n_rows:
            raise ConfigError(
                f"n_train + n_test = {self.n_train + self.n_test} exceeds the "
                f"{n_rows} rows available")


@dataclass(frozen=True, eq=False)
class SplitPair:
    """Disjoint train/test row indices plus how they were produced."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    strategy: Strategy
    seed: int
    repeat: int

    def __post_init__(self):
        object.__setattr__(self, "train_indices", np.sort(np.asarray(self.train_indices, dtype=np.int64)))
        object.__setattr__(self, "test_indices", np.sort(np.asarray(self.test_indices, dtype=np.int64)))
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def __eq__(self, other):
        if not isinstance(other, SplitPair):
            return NotImplemented
        return (self.strategy == other.strategy and self.seed == other.seed
                and self.repeat == other.repeat
                and np.array_equal(self.train_indices, other.train_indices)
                and np.array_equal(self.test_indices, other.test_indices))

    def to_dict(self):
        return {
            "strategy": self.strategy.value,
            "seed": int(self.seed),
            "repeat": int(self.repeat),
            "train_indices": self.train_indices.tolist(),
            "test_indices": self.test_indices.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["train_indices"], dtype=np.int64),
                   np.array(d["test_indices"], dtype=np.int64),
                   Strategy(d["strategy"]), int(d["seed"]), int(d["repeat"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _rng(config, repeat):
    if repeat < 0:
        raise ConfigError(f"repeat must be >= 0, got {repeat}")
    return np.random.default_rng([check_seed(config.seed), int(repeat)])


def _random_train(n_rows, config, rng):
    """Uniform draw of n_train + n_test rows, split into (train, test)."""
    config.check_feasible(n_rows)
    drawn = rng.choice(n_rows, size=config.n_train + config.n_test, replace=False)
    return drawn[:config.n_train], drawn[config.n_train:]


def monte_carlo_split(dataset, config, repeat=0):
    rng = _rng(config, repeat)
    train, test = _random_train(len(dataset), config, rng)
    return SplitPair(train, test, Strategy.MONTE_CARLO, config.seed, repeat)


@njit(cache=True, nogil=True)
def _aggregate_to_ref(pool, ref, use_mean):
    """Mean (or min) Euclidean distance from each pool row to the ``ref`` rows."""
    n, d = pool.shape
    out = np.empty(n)
    for i in range(n):
        total = 0.0
        low = np.inf
        for r in range(ref.shape[0]):
            sq = 0.0
            for j in range(d):
                sq += (pool[i, j] - ref[r, j]) ** 2
            if use_mean:
                total += np.sqrt(sq)
            elif sq < low:
                low = sq
        out[i] = total / ref.shape[0] if use_mean else np.sqrt(low)
    return out


def _point_dists(A, b):
    return np.sqrt(((A - b) ** 2).sum(1))


# Relative slack under which two aggregate distances count as tied. Exact ties
# are common (in 1-D every point between the same selected rows has the same
# summed distance), and rounding must not decide them.
_TIE_RTOL = 1e-9


def _first_max(score):
    """Lowest index whose score is within tie tolerance of the maximum."""
    best = score.max()
    return int(np.flatnonzero(score >= best - _TIE_RTOL * (1.0 + abs(best)))[0])


@njit(cache=True, nogil=True)
def _greedy_extend(pool, acc, available, order, n_done, use_mean, rtol):
    """Append rows to ``order`` from position ``n_done`` on, in place.

    ``acc`` holds each row's summed (mean) or minimum (min) distance to the
    rows already chosen and is updated after every pick.
    """
    n, d = pool.shape
    for step in range(n_done, order.shape[0]):
        best = -np.inf
        for i in range(n):
            if available[i] and acc[i] > best:
                best = acc[i]
        cut = best - rtol * (1.0 + abs(best))
        nxt = -1
        for i in range(n):
            if available[i] and acc[i] >= cut:
                nxt = i
                break
        available[nxt] = False
        order[step] = nxt
        for i in range(n):
            dist = 0.0
            for j in range(d):
                dist += (pool[i, j] - pool[nxt, j]) ** 2
            dist = np.sqrt(dist)
            if use_mean:
                acc[i] += dist
            elif dist < acc[i]:
                acc[i] = dist


def max_dissimilarity_select(pool, reference, n_select, aggregation=Aggregation.MEAN, n_seed_points=1):
    """Greedy maximum-dissimilarity selection.

    Seeds the selection with the ``n_seed_points`` pool rows farthest (by
    ``aggregation`` of Euclidean distances) from ``reference``, then keeps
    adding the unselected pool row farthest from the current selection.
    Returns positions into ``pool`` in selection order; ties go to the
    lowest position.
    """
    aggregation = Aggregation(aggregation)
    n_pool = pool.shape[0]
    if n_select > n_pool:
        raise ConfigError(f"cannot select {n_select} rows from a pool of {n_pool}")
    n_seed_points = min(n_seed_points, n_select)

    pool = np.ascontiguousarray(pool, dtype=np.float64)
    to_ref = _aggregate_to_ref(pool, np.ascontiguousarray(reference, dtype=np.float64),
                               aggregation is Aggregation.MEAN)
    available = np.ones(n_pool, dtype=bool)
    seeds = []
    for _ in range(n_seed_points):
        s = _first_max(np.where(available, to_ref, -np.inf))
        available[s] = False
        seeds.append(s)

    use_mean = aggregation is Aggregation.MEAN
    order = np.empty(n_select, dtype=np.int64)
    order[:len(seeds)] = seeds
    acc = np.zeros(n_pool) if use_mean else np.full(n_pool, np.inf)
    for s in seeds:
        d = _point_dists(pool, pool[s])
        acc = acc + d if use_mean else np.minimum(acc, d)
    # Summed distance ranks candidates the same as the mean over a fixed-size set.
    _greedy_extend(pool, acc, available, order,
                   len(seeds), use_mean, _TIE_RTOL)
    return order


def dissimilarity_split(dataset, config, repeat=0):
    """Random training set; test set of the rows most dissimilar to it.

    The candidate pool is every row not drawn into training. Distances are
    Euclidean on predictors standardized with training-set statistics.
    """
    rng = _rng(config, repeat)
    train, _ = _random_train(len(dataset), config, rng)
    mask = np.ones(len(dataset), dtype=bool)
    mask[train] = False
    pool = np.flatnonzero(mask)
    if pool.shape[0] < config.n_test:
        raise ConfigError(f"only {pool.shape[0]} rows left for {config.n_test} test rows")
    params = StandardizationParams.from_rows(dataset.X[train])
    picked = max_dissimilarity_select(
        standardize(dataset.X[pool], params), standardize(dataset.X[train], params),
        config.n_test, config.aggregation, config.n_seed_points)
    return SplitPair(train, pool[picked], Strategy.DISSIMILARITY, config.seed, repeat)


def group_partition(groups, n_train, n_test, rng, max_shuffles=1000):
    """Shuffle group ids and take test groups until they hold >= n_test rows.

    Retries with fresh shuffles while the remaining groups hold fewer than
    ``n_train`` rows. Returns ``(train_groups, test_groups)``.
    """
    ids, counts = np.unique(np.asarray(groups), return_counts=True)
    if ids.shape[0] < 2:
        raise PartitionError(f"group split needs >= 2 distinct groups, got {ids.shape[0]}")
    total = counts.sum()
    for _ in range(max_shuffles):
        perm = rng.permutation(ids.shape[0])
        cum = np.cumsum(counts[perm])
        cut = int(np.searchsorted(cum, n_test)) + 1
        if cut < ids.shape[0] and total - cum[cut - 1] >= n_train:
            return ids[perm[cut:]], ids[perm[:cut]]
    sizes = ", ".join(f"{g}={c}" for g, c in zip(ids, counts))
    raise PartitionError(
        f"no group partition gives >= {n_test} test rows and >= {n_train} train rows "
        f"after {max_shuffles} shuffles; group sizes: {sizes}")


def _group_split(groups, config, rng):
    config.check_feasible(groups.shape[0])
    train_groups, test_groups = group_partition(
        groups, config.n_train, config.n_test, rng, config.max_group_shuffles)
    train_pool = np.flatnonzero(np.isin(groups, train_groups))
    test_pool = np.flatnonzero(np.isin(groups, test_groups))
    test = rng.choice(test_pool, size=config.n_test, replace=False)
    train = rng.choice(train_pool, size=config.n_train, replace=False)
    return train, test


def informed_split(dataset, config, repeat=0):
    """Group split on capture ids: no capture feeds both sides."""
    if not dataset.has_groups:
        raise PartitionError("informed split precondition failed: every row needs a non-empty capture id")
    rng = _rng(config, repeat)
    train, test = _group_split(np.asarray(dataset.groups).astype(str), config, rng)
    return SplitPair(train, test, Strategy.INFORMED, config.seed, repeat)


_cluster_lock = threading.Lock()


def cluster_labels(dataset, n_clusters, seed):
    """k-means labels on predictors standardized with whole-dataset statistics.

    The clustering depends only on the (immutable) dataset, ``n_clusters`` and
    ``seed``, so it is computed once and memoized on the dataset; every repeat
    of a clustering split reuses it.
    """
    if len(dataset) < n_clusters:
        raise ConfigError(f"{len(dataset)} rows cannot form {n_clusters} clusters")
    key = (int(n_clusters), check_seed(seed))
    with _cluster_lock:
        cache = dataset.__dict__.setdefault("_cluster_cache", {})
        if key not in cache:
            labels, _, _ = kmeans_fit(standardize(dataset.X, dataset.column_stats), n_clusters, seed)
            labels.setflags(write=False)
            cache[key] = labels
        return cache[key]


def clustering_split(dataset, config, repeat=0):
    """Group split where the groups are k-means clusters instead of captures."""
    labels = cluster_labels(dataset, config.n_clusters, config.seed)
    rng = _rng(config, repeat)
    train, test = _group_split(labels, config, rng)
    return SplitPair(train, test, Strategy.CLUSTERING, config.seed, repeat)


SPLITTERS = {
    Strategy.MONTE_CARLO: monte_carlo_split,
    Strategy.DISSIMILARITY: dissimilarity_split,
    Strategy.INFORMED: informed_split,
    Strategy.CLUSTERING: clustering_split,
}


def make_split(dataset, config, repeat=0):
    return SPLITTERS[config.strategy](dataset, config, repeat)


class StrategySplitter:
    """scikit-learn style splitter yielding one train/test pair per repeat.

    ``split(X, y, groups)`` wraps the arrays in a :class:`Dataset`; ``groups``
    is only consulted by the informed strategy.
    """

    def __init__(self, strategy="monte_carlo", n_repeats=1, n_train=2000, n_test=1000,
                 aggregation="mean", n_clusters=10, random_state=0):
        self.strategy = strategy
        self.n_repeats = n_repeats
        self.n_train = n_train
        self.n_test = n_test
        self.aggregation = aggregation
        self.n_clusters = n_clusters
        self.random_state = random_state

    def get_n_splits(self, X=None, y=None, groups=None):
        return self.n_repeats

    def split(self, X, y=None, groups=None):
        from .data import Dataset

        X = np.asarray(X, dtype=np.float64)
        y = np.zeros(X.shape[0], dtype=np.int64) if y is None else np.asarray(y)
        groups = np.full(X.shape[0], "", dtype=object) if groups is None else np.asarray(groups).astype(str).astype(object)
        dataset = Dataset(X, y, groups)
        config = SplitConfig(self.n_train, self.n_test, self.random_state, self.strategy,
                             self.aggregation, self.n_clusters)
        for repeat in range(self.n_repeats):
            pair = make_split(dataset, config, repeat)
            yield pair.train_indices, pair.test_indices
