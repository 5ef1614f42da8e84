import numpy as np

from czekan.distance import DistanceMatrix, distance_matrix
from czekan.ingest import Dataset


def points_dataset(x, labels=None) -> Dataset:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return Dataset(
        observations=x,
        feature_names=tuple(f"f{j}" for j in range(x.shape[1])),
        row_ids=tuple(str(i) for i in range(x.shape[0])),
        labels=None if labels is None else tuple(str(v) for v in labels),
    )


def euclid(x) -> DistanceMatrix:
    return distance_matrix(points_dataset(x))


def random_integer_dm(rng, n, high=100) -> DistanceMatrix:
    w = rng.integers(1, high, size=(n, n)).astype(float)
    w = np.triu(w, 1)
    return DistanceMatrix(w + w.T)
