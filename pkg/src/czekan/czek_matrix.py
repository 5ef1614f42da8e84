"""Discretization of a seriated distance matrix into Czekanowski classes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distance import DistanceMatrix
from .seriation import check_permutation

BREAK_RULES = ("quantile", "equal_width")


class CzekMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class CzekMatrix:
    """Integer class matrix in seriated layout.

    ``classes[i, j]`` is the class (1 = closest) of the pair of observations
    ``permutation[i]`` and ``permutation[j]``. ``breaks`` is a 1-D array of
    thresholds in symmetric mode and a list of per-column thresholds in
    asymmetric mode.
    """

    classes: np.ndarray
    permutation: np.ndarray
    breaks: object
    mode: str
    n_classes: int
    meta: dict

    @property
    def n(self) -> int:
        return self.classes.shape[0]

    def class_of_pair(self, a: int, b: int) -> int:
        """Class of observations ``a`` and ``b`` given by original row index."""
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(self.n)
        return int(self.classes[inv[a], inv[b]])


def default_probs(n_classes: int) -> list[float]:
    return [i / n_classes for i in range(1, n_classes)]


def quantile7(values: np.ndarray, probs: Sequence[float]) -> np.ndarray:
    """Sample quantiles by linear interpolation between order statistics."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    out = []
    for p in probs:
        h = (n - 1) * p
        lo = math.floor(h)
        hi = min(lo + 1, n - 1)
        out.append(x[lo] + (h - lo) * (x[hi] - x[lo]))
    return np.array(out)


def czek_symmetric(
    W: DistanceMatrix,
    pi,
    n_classes: int = 5,
    probs: Optional[Sequence[float]] = None,
    breaks: str = "quantile",
) -> CzekMatrix:
    """Symmetric Czekanowski matrix.

    Thresholds are taken from the off-diagonal distances, either as their
    quantiles at ``probs`` (``breaks="quantile"``) or as ``n_classes`` equal
    width intervals between their minimum and maximum (``"equal_width"``).
    A pair lands in class ``1 + #{thresholds < distance}``; the diagonal is
    always class 1.
    """
    n = W.n
    pi = check_permutation(pi, n)
    if n_classes < 2:
        raise CzekMatrixError("n_classes must be at least 2 in symmetric mode")
    if breaks not in BREAK_RULES:
        raise CzekMatrixError(f"unknown break rule {breaks!r}; choose from {BREAK_RULES}")
    if probs is None:
        probs = default_probs(n_classes)
    probs = [float(p) for p in probs]
    if breaks == "quantile":
        if len(probs) != n_classes - 1:
            raise CzekMatrixError(f"need {n_classes - 1} probs for {n_classes} classes, got {len(probs)}")
        if any(not 0 < p < 1 for p in probs) or any(b <= a for a, b in zip(probs, probs[1:])):
            raise CzekMatrixError("probs must be strictly increasing inside (0, 1)")

    P = W.permuted(pi)
    if n == 1:
        return CzekMatrix(np.ones((1, 1), dtype=int), pi, np.zeros(0), "symmetric", n_classes,
                          {"break_rule": breaks, "probs": probs})
    iu = np.triu_indices(n, 1)
    off = W.values[np.triu_indices(n, 1)]
    if breaks == "quantile":
        thr = quantile7(off, probs)
    else:
        lo, hi = float(off.min()), float(off.max())
        thr = np.array([lo + (hi - lo) * i / n_classes for i in range(1, n_classes)])

    n_distinct = np.unique(off).size
    if n_classes > n_distinct:
        warnings.warn(f"{n_classes} classes requested but only {n_distinct} distinct distances; "
                      "some classes will be empty", RuntimeWarning, stacklevel=2)

    classes = 1 + np.searchsorted(thr, P, side="left")
    classes = np.asarray(classes, dtype=int)
    np.fill_diagonal(classes, 1)
    # enforce exact symmetry (searchsorted is elementwise, so it already holds)
    classes[iu[1], iu[0]] = classes[iu]
    return CzekMatrix(classes, pi, thr, "symmetric", n_classes,
                      {"break_rule": breaks, "probs": probs if breaks == "quantile" else None,
                       "quantile_type": 7 if breaks == "quantile" else None})


def czek_asymmetric(
    W: DistanceMatrix,
    pi,
    n_classes: int = 5,
    column_group_fractions: Optional[Sequence[float]] = None,
) -> CzekMatrix:
    """Asymmetric Czekanowski matrix, one ranking per column.

    For column ``c`` the rows are ranked by distance to observation ``c``
    (self first, ties by seriated position). The first ``ceil(f1 * N)`` rows
    get class 1, the next ``ceil(f2 * N)`` class 2 and so on; whatever is
    left after the last group is put in the last class.
    """
    n = W.n
    pi = check_permutation(pi, n)
    if n_classes < 1:
        raise CzekMatrixError("n_classes must be at least 1")
    if column_group_fractions is None:
        column_group_fractions = [1.0 / n_classes] * n_classes
    fr = [float(f) for f in column_group_fractions]
    if len(fr) != n_classes or any(f < 0 for f in fr) or not math.isclose(sum(fr), 1.0, abs_tol=1e-9):
        raise CzekMatrixError("column_group_fractions must be n_classes non-negative values summing to 1")

    sizes = [math.ceil(f * n - 1e-9) for f in fr]
    rank_class = np.empty(n, dtype=int)
    start = 0
    for c, size in enumerate(sizes, start=1):
        rank_class[start:start + size] = c
        start = min(n, start + size)
    if start < n:
        rank_class[start:] = n_classes

    P = W.permuted(pi)
    classes = np.empty((n, n), dtype=int)
    col_breaks = []
    for c in range(n):
        d = P[:, c].copy()
        d[c] = -1.0
        ranking = np.argsort(d, kind="stable")
        classes[ranking, c] = rank_class
        edges = []
        for cls in range(1, n_classes):
            members = ranking[rank_class == cls]
            edges.append(float(P[members, c].max()) if members.size else float("nan"))
        col_breaks.append(edges)
    return CzekMatrix(classes, pi, col_breaks, "asymmetric", n_classes,
                      {"column_group_fractions": fr, "group_sizes": sizes})
