"""Class-balancing by majority downsampling."""

import numpy as np

from .._validation import check_seed
from ..exceptions import DegenerateDataError


def downsample(labels, seed=0):
    """Indices of a class-balanced subset of ``labels``.

    The majority class is subsampled without replacement to the minority
    count; the minority class is kept whole. The returned indices are in a
    seeded random order.
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if classes.shape[0] != 2:
        raise DegenerateDataError(
            f"downsampling needs both classes present, got {classes.shape[0]} class(es)")
    rng = np.random.default_rng(check_seed(seed))
    minority = classes[np.argmin(counts)]
    majority = classes[np.argmax(counts)] if counts[0] != counts[1] else classes[1]
    n_min = counts.min()
    keep_min = np.flatnonzero(labels == minority)
    maj_idx = np.flatnonzero(labels == majority)
    keep_maj = np.sort(rng.choice(maj_idx, size=n_min, replace=False))
    return rng.permutation(np.concatenate([keep_min, keep_maj]))
