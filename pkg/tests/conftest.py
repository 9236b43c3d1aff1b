import numpy as np
import pytest

from splitlab.data import N_FEATURES, Dataset, generate_synthetic


@pytest.fixture(scope="session")
def synthetic():
    """The default synthetic dataset, seed 0 (20866 rows, 19 captures)."""
    return generate_synthetic(seed=0)


def make_dataset(X, y=None, groups=None):
    """Dataset from an arbitrary-width matrix, zero-padded to the schema width."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    pad = np.zeros((X.shape[0], N_FEATURES - X.shape[1]))
    n = X.shape[0]
    if y is None:
        y = np.arange(n) % 2
    if groups is None:
        groups = np.array([f"g{i % 3}" for i in range(n)], dtype=object)
    return Dataset(np.hstack([X, pad]), np.asarray(y), np.asarray(groups, dtype=object))


def blobs(n_per_class=100, gap=5.0, n_features=N_FEATURES, seed=0):
    """Two well-separated Gaussian blobs in the non-negative orthant."""
    rng = np.random.default_rng(seed)
    a = rng.normal(1.0, 0.2, size=(n_per_class, n_features))
    b = rng.normal(1.0 + gap, 0.2, size=(n_per_class, n_features))
    X = np.clip(np.vstack([a, b]), 0.0, None)
    y = np.repeat([0, 1], n_per_class)
    return X, y
