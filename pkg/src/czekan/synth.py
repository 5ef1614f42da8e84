"""Gaussian blob datasets with known labels."""

from __future__ import annotations

import csv
import io

import numpy as np


def simplex_centers(k: int, dim: int, separation: float) -> np.ndarray:
    """``k`` points in ``dim`` dimensions, every pair ``separation`` apart.

    With ``dim >= k`` the centers are the centered unit vectors
    ``separation / sqrt(2) * (e_i - 1/k)``, so the offsets are shared by the
    first ``k`` features instead of sitting on one axis (per-feature
    scaling would otherwise shrink the separating feature and leave the
    noise ones intact). With ``dim == k - 1`` the same simplex is expressed
    in an orthonormal basis of its span.
    """
    if k < 1 or dim < 1:
        raise ValueError("k and dim must be positive")
    if k > dim + 1:
        raise ValueError(f"{k} equidistant centers need at least {k - 1} dimensions, got {dim}")
    if k == 1:
        return np.zeros((1, dim))
    e = (np.eye(k) - 1.0 / k) * (separation / np.sqrt(2.0))
    out = np.zeros((k, dim))
    if dim >= k:
        out[:, :k] = e
    else:
        u, _, _ = np.linalg.svd(e)
        out[:, : k - 1] = e @ u[:, : k - 1]
    return out


def gaussian_blobs(n_per_cluster: int, k: int, dim: int, separation: float, seed: int = 0):
    """Sample ``k`` unit-covariance blobs; returns ``(x, labels)``."""
    if n_per_cluster < 1:
        raise ValueError("n_per_cluster must be positive")
    if separation < 0:
        raise ValueError("separation must be non-negative")
    centers = simplex_centers(k, dim, separation)
    rng = np.random.default_rng(seed)
    x = np.concatenate([c + rng.standard_normal((n_per_cluster, dim)) for c in centers])
    labels = np.repeat(np.arange(1, k + 1), n_per_cluster)
    return x, labels


def blobs_csv(n_per_cluster: int, k: int, dim: int, separation: float, seed: int = 0) -> str:
    """CSV text with columns ``id, x1..x<dim>, label``."""
    x, labels = gaussian_blobs(n_per_cluster, k, dim, separation, seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id"] + [f"x{j + 1}" for j in range(dim)] + ["label"])
    for i, (row, lab) in enumerate(zip(x, labels), start=1):
        w.writerow([f"s{i}"] + [repr(float(v)) for v in row] + [str(lab)])
    return buf.getvalue()
