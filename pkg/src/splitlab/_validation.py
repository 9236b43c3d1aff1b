"""Input checks used by the estimators, thin wrappers over scikit-learn's."""

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from .exceptions import ConfigError, DegenerateDataError


def check_features(X, n_features=None):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, but the model was fitted with {n_features}"
        )
    return np.ascontiguousarray(X)


def check_binary_xy(X, y):
    """Validate a binary classification problem.

    Returns ``(X, y01, classes)`` where ``y01`` encodes ``classes[1]`` as 1.
    """
    X, y = check_X_y(X, y, dtype=np.float64)
    classes = np.unique(y)
    if classes.shape[0] != 2:
        raise DegenerateDataError(
            f"binary classification needs exactly two classes, got {classes.shape[0]}"
        )
    y01 = (y == classes[1]).astype(np.float64)
    return np.ascontiguousarray(X), y01, classes


def check_seed(seed):
    if seed is None:
        return 0
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed
