"""Evaluation scores for clusterings and seriations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distance import DistanceMatrix

MAX_EXHAUSTIVE_K = 8


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _ratio(num: float, den: float) -> Optional[float]:
    # None marks an undefined score (zero denominator)
    return None if den == 0 else num / den


def accuracy(c: ConfusionCounts) -> float:
    if c.n == 0:
        raise MetricsError("no observations")
    return (c.tp + c.tn) / c.n


def precision(c: ConfusionCounts) -> Optional[float]:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionCounts) -> Optional[float]:
    return _ratio(c.tp, c.tp + c.fn)


def f1(c: ConfusionCounts) -> Optional[float]:
    return _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)


def kappa(c: ConfusionCounts) -> Optional[float]:
    """Cohen's kappa for a 2 x 2 table.

    ``2 (TP TN - FN FP) / ((TP + FP)(FP + TN) + (TP + FN)(FN + TN))``
    """
    den = (c.tp + c.fp) * (c.fp + c.tn) + (c.tp + c.fn) * (c.fn + c.tn)
    return _ratio(2 * (c.tp * c.tn - c.fn * c.fp), den)


def classification_scores(c: ConfusionCounts) -> dict:
    return {
        "accuracy": accuracy(c),
        "precision": precision(c),
        "recall": recall(c),
        "f1": f1(c),
        "kappa": kappa(c),
    }


def u_m_factor(W: DistanceMatrix, pi) -> float:
    """Arrangement factor ``2/n^2 sum_{i>j} (i - j)^2 / (W[pi_i, pi_j] + 1)``.

    Terms are summed with ``math.fsum`` so the value is exactly the same for
    ``pi`` and its reversal.
    """
    pi = np.asarray(pi)
    n = pi.size
    if n < 2:
        return 0.0
    P = W.permuted(pi)
    i, j = np.triu_indices(n, 1)
    return 2.0 / n ** 2 * math.fsum((j - i) ** 2 / (P[i, j] + 1.0))


def path_length(W: DistanceMatrix, pi) -> float:
    """Sum of distances between consecutive observations in order ``pi``
    (exactly rounded, hence reversal invariant)."""
    pi = np.asarray(pi)
    return math.fsum(W.values[pi[:-1], pi[1:]])


@dataclass
class LabelMatch:
    assignment: dict
    accuracy: float
    table: np.ndarray
    clusters: list
    classes: list
    pred: np.ndarray = field(repr=False)
    truth: np.ndarray = field(repr=False)

    def counts(self, positive) -> ConfusionCounts:
        """One-vs-rest counts after mapping clusters to classes."""
        pred = np.array([self.assignment[c] for c in self.pred.tolist()])
        truth = self.truth
        return ConfusionCounts(
            tp=int(np.sum((pred == positive) & (truth == positive))),
            tn=int(np.sum((pred != positive) & (truth != positive))),
            fp=int(np.sum((pred == positive) & (truth != positive))),
            fn=int(np.sum((pred != positive) & (truth == positive))),
        )


def match_labels(pred: Sequence, truth: Sequence, k: Optional[int] = None) -> LabelMatch:
    """Map clusters to classes so that accuracy is maximal.

    Every injective labelling of the clusters by classes is tried (when
    there are more clusters than classes, clusters may share a class). The
    first maximizer in lexicographic order of the sorted class list wins.
    """
    pred = np.asarray(getattr(pred, "labels_original_order", pred))
    truth = np.asarray([str(t) for t in truth])
    if pred.shape[0] != truth.shape[0]:
        raise MetricsError(f"{pred.shape[0]} predictions but {truth.shape[0]} true labels")
    clusters = sorted(set(pred.tolist()))
    classes = sorted(set(truth.tolist()))
    k = len(clusters) if k is None else k
    if max(k, len(clusters)) > MAX_EXHAUSTIVE_K:
        raise MetricsError(f"k={k} is too large for exhaustive label matching (max {MAX_EXHAUSTIVE_K})")
    table = np.array([[np.sum((pred == c) & (truth == t)) for t in classes] for c in clusters])

    if len(clusters) <= len(classes):
        candidates = itertools.permutations(range(len(classes)), len(clusters))
    else:
        candidates = itertools.product(range(len(classes)), repeat=len(clusters))
    best, best_hits = None, -1
    for cand in candidates:
        hits = sum(int(table[i, j]) for i, j in enumerate(cand))
        if hits > best_hits:
            best, best_hits = cand, hits
    assignment = {c: classes[j] for c, j in zip(clusters, best)}
    return LabelMatch(assignment, best_hits / len(truth), table, clusters, classes, pred, truth)


def score_report(
    pred,
    truth: Sequence,
    W: Optional[DistanceMatrix] = None,
    pi=None,
) -> dict:
    """Accuracy, kappa and per-class one-vs-rest scores, plus arrangement
    metrics when a distance matrix and order are supplied."""
    m = match_labels(pred, truth)
    report = {
        "accuracy": m.accuracy,
        "best_label_assignment": {str(k): v for k, v in m.assignment.items()},
        "per_class": {},
        "contingency": {"clusters": [str(c) for c in m.clusters], "classes": m.classes,
                        "counts": m.table.tolist()},
    }
    for cls in m.classes:
        c = m.counts(cls)
        report["per_class"][cls] = {
            "tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
            "precision": precision(c), "recall": recall(c), "f1": f1(c),
        }
    if len(m.classes) == 2:
        report["kappa"] = kappa(m.counts(m.classes[1]))
    else:
        report["kappa"] = None
    if W is not None and pi is not None:
        report["u_m"] = u_m_factor(W, pi)
        report["path_length"] = path_length(W, pi)
    return report


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def format_table(columns: dict, class_names: Optional[dict] = None) -> str:
    """Aligned text table, one column per method, rows as in the WBC report."""
    names = list(columns)
    rows = [("Accuracy", lambda r: r["accuracy"]), ("Kappa", lambda r: r.get("kappa"))]
    if any("path_length" in r for r in columns.values()):
        rows += [("Path Length", lambda r: r.get("path_length")), ("U_m Factor", lambda r: r.get("u_m"))]
    lines = []
    width = max(12, *(len(n) for n in names)) + 2
    lines.append(" " * 14 + "".join(n.rjust(width) for n in names))
    for label, get in rows:
        lines.append(label.ljust(14) + "".join(_fmt(get(columns[n])).rjust(width) for n in names))
    classes = next(iter(columns.values()))["per_class"].keys()
    for cls in classes:
        title = (class_names or {}).get(cls, cls)
        lines.append(f"-- {title} (as positive) --")
        for stat in ("precision", "recall", "f1"):
            lines.append(stat.capitalize().ljust(14)
                         + "".join(_fmt(columns[n]["per_class"][cls][stat]).rjust(width) for n in names))
    return "\n".join(lines)
