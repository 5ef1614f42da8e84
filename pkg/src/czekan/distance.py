"""Pairwise distances between observations."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import Dataset

METRICS = ("euclidean",)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, non-negative N x N matrix with a zero diagonal."""

    values: np.ndarray
    metric_name: str = "euclidean"

    def __post_init__(self):
        w = np.array(self.values, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("distances must be finite and non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "values", w)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def permuted(self, order) -> np.ndarray:
        """Return ``W[order][:, order]``."""
        order = np.asarray(order)
        return self.values[np.ix_(order, order)]

    def to_csv(self, path, row_ids=None) -> None:
        path = Path(path)
        ids = list(row_ids) if row_ids is not None else [str(i + 1) for i in range(self.n)]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + ids)
            for rid, row in zip(ids, self.values):
                w.writerow([rid] + [repr(float(v)) for v in row])


def distance_matrix(ds: Dataset, metric: str = "euclidean") -> DistanceMatrix:
    """Euclidean distances between all pairs of rows of ``ds``.

    Squared differences are accumulated one feature at a time, in column
    order, so equal inputs give bit-identical distances regardless of N.
    """
    if metric not in METRICS:
        raise ValueError(f"unsupported metric {metric!r}; choose from {METRICS}")
    x = ds.observations
    acc = np.zeros((x.shape[0], x.shape[0]))
    for col in x.T:
        dev = col[:, None] - col[None, :]
        acc += dev * dev
    w = np.sqrt(acc)
    # exact symmetry: (a-b)^2 == (b-a)^2 in IEEE arithmetic, diagonal is 0
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix(w, metric)
