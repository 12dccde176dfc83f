"""Two well-separated Gaussian blobs shared by the integration tests."""

import numpy as np

CENTERS = np.array([[0.0, 0.0], [10.0, 10.0]])
STD = 1.0
PER_BLOB = 200
LAM = 20
SEED = 0


def two_blobs(per_blob=PER_BLOB, seed=SEED):
    """Shuffled points and their blob ids."""
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(c, STD, (per_blob, 2)) for c in CENTERS])
    y = np.repeat(np.arange(len(CENTERS)), per_blob)
    p = rng.permutation(len(X))
    return X[p], y[p]


def held_out(per_blob=100):
    return two_blobs(per_blob, seed=SEED + 1000)
