import itertools

import numpy as np
import pytest

from czekan.distance import DistanceMatrix
from czekan.metrics import (
    ConfusionCounts,
    MetricsError,
    accuracy,
    classification_scores,
    f1,
    format_table,
    kappa,
    match_labels,
    path_length,
    precision,
    recall,
    score_report,
    u_m_factor,
)

from .helpers import euclid
from .oracles import naive

WBC_HC = ConfusionCounts(tp=230, tn=431, fp=13, fn=9)


def test_wbc_malignant_scores():
    assert precision(WBC_HC) == pytest.approx(0.9465, abs=5e-5)
    assert recall(WBC_HC) == pytest.approx(0.9623, abs=5e-5)
    assert kappa(WBC_HC) == pytest.approx(0.9295, abs=5e-5)
    assert accuracy(WBC_HC) == pytest.approx(0.9678, abs=5e-5)


def test_perfect_classifier():
    s = classification_scores(ConfusionCounts(tp=10, tn=7, fp=0, fn=0))
    assert s == {"accuracy": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0, "kappa": 1.0}


def test_coin_flip_table():
    c = ConfusionCounts(25, 25, 25, 25)
    assert accuracy(c) == 0.5
    assert kappa(c) == 0.0


def test_kappa_matches_observed_vs_chance_form():
    rng = np.random.default_rng(0)
    for _ in range(50):
        tp, tn, fp, fn = (int(v) for v in rng.integers(0, 50, 4))
        c = ConfusionCounts(tp, tn, fp, fn)
        n = c.n
        if n == 0:
            continue
        po = (tp + tn) / n
        pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / n ** 2
        if pe == 1:
            continue
        assert kappa(c) == pytest.approx((po - pe) / (1 - pe), abs=1e-12)


def test_f1_is_harmonic_mean():
    rng = np.random.default_rng(1)
    for _ in range(100):
        c = ConfusionCounts(*(int(v) for v in rng.integers(1, 100, 4)))
        p, r = precision(c), recall(c)
        assert abs(f1(c) - 2 * p * r / (p + r)) <= 1e-12


def test_undefined_scores_are_none():
    c = ConfusionCounts(tp=0, tn=5, fp=0, fn=0)
    assert precision(c) is None and recall(c) is None and f1(c) is None
    with pytest.raises(MetricsError):
        accuracy(ConfusionCounts(0, 0, 0, 0))


def test_u_m_two_points():
    W = DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert u_m_factor(W, [0, 1]) == 0.25
    assert u_m_factor(W, [1, 0]) == 0.25


def test_u_m_matches_loop_oracle():
    rng = np.random.default_rng(2)
    W = euclid(rng.normal(size=(5, 2)))
    pi = rng.permutation(5)
    assert abs(u_m_factor(W, pi) - naive.u_m(W.values, pi)) <= 1e-12


def test_path_length_small_cases():
    W = euclid([[0.0], [3.0], [7.0]])
    assert path_length(W, [0, 1]) == 3.0
    assert path_length(W, [0, 1, 2]) == path_length(W, [2, 1, 0]) == 7.0
    assert path_length(W, [1, 0, 2]) == 10.0


def test_reversal_exact():
    rng = np.random.default_rng(3)
    for n in (5, 30, 120):
        W = euclid(rng.normal(size=(n, 3)))
        pi = rng.permutation(n)
        assert u_m_factor(W, pi) == u_m_factor(W, pi[::-1])
        assert path_length(W, pi) == path_length(W, pi[::-1])


def test_match_swapped_labels():
    m = match_labels([1, 1, 2, 2, 2], ["b", "b", "a", "a", "a"])
    assert m.accuracy == 1.0
    assert m.assignment == {1: "b", 2: "a"}


def test_single_cluster_majority():
    m = match_labels([1] * 10, ["x"] * 7 + ["y"] * 3)
    assert m.accuracy == 0.7


def test_match_equals_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(20):
        k = int(rng.integers(2, 5))
        pred = rng.integers(1, k + 1, 40)
        truth = rng.integers(0, k, 40)
        best = 0
        for perm in itertools.permutations(range(k)):
            best = max(best, sum(perm[p - 1] == t for p, t in zip(pred, truth)))
        clusters = sorted(set(pred.tolist()))
        if len(clusters) == k:
            assert match_labels(pred, truth).accuracy == best / 40


def test_more_clusters_than_classes():
    m = match_labels([1, 2, 3, 3], ["a", "a", "b", "b"])
    assert m.accuracy == 1.0


def test_length_mismatch():
    with pytest.raises(MetricsError):
        match_labels([1, 2], ["a"])


def test_too_many_clusters():
    with pytest.raises(MetricsError):
        match_labels(list(range(10)), ["a"] * 10)


def test_score_report_and_table():
    pred = [1] * 5 + [2] * 5
    truth = ["2"] * 4 + ["4"] * 6
    W = euclid(np.arange(10.0)[:, None])
    r = score_report(pred, truth, W, np.arange(10))
    assert r["accuracy"] == 0.9
    assert r["per_class"]["4"]["recall"] == pytest.approx(5 / 6)
    assert r["path_length"] == 9.0
    text = format_table({"X": r}, {"2": "Benign", "4": "Malignant"})
    assert "Benign (as positive)" in text and "0.9000" in text
