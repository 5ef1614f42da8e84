"""E-divisive change-point detection with energy statistics."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ChangePointError(ValueError):
    pass


@dataclass(frozen=True)
class EDivParams:
    sig_level: float = 0.05
    n_perm: int = 199
    min_size: int = 2
    alpha: float = 1.0
    max_changepoints: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.sig_level < 1:
            raise ChangePointError("sig_level must lie in (0, 1)")
        if self.n_perm < 1:
            raise ChangePointError("n_perm must be at least 1")
        if self.min_size < 2:
            raise ChangePointError("min_size must be at least 2")
        if not 0 < self.alpha <= 2:
            raise ChangePointError("alpha must lie in (0, 2]")
        if self.max_changepoints is not None and self.max_changepoints < 0:
            raise ChangePointError("max_changepoints must be non-negative")


@dataclass
class ChangePointSet:
    """Accepted change points.

    ``locations`` are 1-based: a location ``tau`` means a new segment starts
    at observation ``tau``.
    """

    locations: list[int] = field(default_factory=list)
    p_values: list[float] = field(default_factory=list)
    test_stats: list[float] = field(default_factory=list)
    rejected_candidate: Optional[dict] = None

    def segments(self, n: int) -> list[tuple[int, int]]:
        """1-based inclusive ``(start, end)`` ranges between change points."""
        cuts = [1] + sorted(self.locations) + [n + 1]
        return [(a, b - 1) for a, b in zip(cuts, cuts[1:])]

    def to_dict(self) -> dict:
        return {
            "locations": list(self.locations),
            "p_values": list(self.p_values),
            "test_stats": list(self.test_stats),
            "rejected_candidate": self.rejected_candidate,
        }


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def _pair_dist(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return d if alpha == 1 else d ** alpha


def energy_stat(segment_a, segment_b, alpha: float = 1.0) -> float:
    """Scaled energy divergence ``Q(A, B; alpha)`` between two samples.

    ``Q = |A||B| / (|A| + |B|) * E`` with::

        E = 2/(nm) sum|a - b|^alpha - C(n,2)^-1 sum_{i<j}|a_i - a_j|^alpha
            - C(m,2)^-1 sum_{i<j}|b_i - b_j|^alpha

    A within-sample term over a single point is zero.
    """
    a, b = _as_points(segment_a), _as_points(segment_b)
    n, m = a.shape[0], b.shape[0]
    if n < 1 or m < 1:
        raise ChangePointError("energy_stat needs two non-empty samples")
    between = _pair_dist(a, b, alpha).sum()
    within_a = np.triu(_pair_dist(a, a, alpha), 1).sum() / (n * (n - 1) / 2) if n > 1 else 0.0
    within_b = np.triu(_pair_dist(b, b, alpha), 1).sum() / (m * (m - 1) / 2) if m > 1 else 0.0
    e = 2.0 * between / (n * m) - within_a - within_b
    return float(n * m / (n + m) * e)


def split_scores(dist: np.ndarray, min_size: int) -> np.ndarray:
    """``Q`` for every admissible split of one segment.

    ``dist`` holds the alpha-powered pairwise distances of the segment in
    order. Entry ``t`` of the result scores the split into ``[0, t)`` and
    ``[t, n)``; inadmissible splits are ``-inf``.
    """
    n = dist.shape[0]
    out = np.full(n + 1, -np.inf)
    if n < 2 * min_size:
        return out
    c = np.zeros((n + 1, n + 1))
    c[1:, 1:] = dist.cumsum(axis=0).cumsum(axis=1)
    t = np.arange(min_size, n - min_size + 1)
    total = c[n, n]
    block_a = c[t, t]
    block_b = total - c[t, n] - c[n, t] + block_a
    between = c[t, n] - block_a
    na, nb = t.astype(float), (n - t).astype(float)
    e = 2.0 * between / (na * nb) - block_a / (na * (na - 1)) - block_b / (nb * (nb - 1))
    out[t] = na * nb / n * e
    return out


def _best_split(dist: np.ndarray, bounds: list[tuple[int, int]], min_size: int):
    """Best ``(q, split)`` over all segments; split is a global 0-based index."""
    best_q, best_at = -np.inf, None
    for s, e in bounds:
        scores = split_scores(dist[s:e, s:e], min_size)
        t = int(np.argmax(scores))
        if scores[t] > best_q:
            best_q, best_at = float(scores[t]), s + t
    return best_q, best_at


def _permuted_best(dist, bounds, min_size, seed_seq) -> float:
    rng = np.random.default_rng(seed_seq)
    idx = np.arange(dist.shape[0])
    for s, e in bounds:
        idx[s:e] = s + rng.permutation(e - s)
    return _best_split(dist[np.ix_(idx, idx)], bounds, min_size)[0]


def e_divisive(data, params: EDivParams = EDivParams(), threads: int = 1) -> ChangePointSet:
    """Hierarchical E-divisive segmentation.

    ``data`` is an N x d array of observations in sequence order, or a
    membership matrix (K x N, observations as columns). Each round finds the
    split maximizing ``Q`` across current segments, then permutes
    observations within every segment ``n_perm`` times and recomputes the
    maximum. The split is accepted when ``#{q_r >= q} / (n_perm + 1)`` is
    below ``sig_level``; the first rejection ends the search.

    Replicates draw from independent seed-sequence children, so the output
    does not depend on ``threads``.
    """
    if hasattr(data, "values") and hasattr(data, "centroids"):
        x = np.asarray(data.values, dtype=float).T
    else:
        x = _as_points(data)
    n = x.shape[0]
    result = ChangePointSet()
    if n < 2 * params.min_size:
        return result
    dist = _pair_dist(x, x, params.alpha)
    cuts: list[int] = []
    root = np.random.SeedSequence(params.seed)
    limit = params.max_changepoints
    while limit is None or len(cuts) < limit:
        edges = [0] + cuts + [n]
        bounds = list(zip(edges, edges[1:]))
        q, at = _best_split(dist, bounds, params.min_size)
        if at is None:
            break
        children = root.spawn(params.n_perm)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                reps = list(pool.map(lambda ss: _permuted_best(dist, bounds, params.min_size, ss), children))
        else:
            reps = [_permuted_best(dist, bounds, params.min_size, ss) for ss in children]
        p = sum(r >= q for r in reps) / (params.n_perm + 1)
        if p < params.sig_level:
            cuts = sorted(cuts + [at])
            result.locations.append(at + 1)
            result.p_values.append(p)
            result.test_stats.append(q)
        else:
            result.rejected_candidate = {"location": at + 1, "p_value": p, "test_stat": q}
            break
    order = np.argsort(result.locations)
    result.locations = [result.locations[i] for i in order]
    result.p_values = [result.p_values[i] for i in order]
    result.test_stats = [result.test_stats[i] for i in order]
    return result
