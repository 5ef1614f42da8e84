"""Fuzzy C-means on the rows of a Czekanowski matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class FcmError(ValueError):
    pass


@dataclass(frozen=True)
class FcmParams:
    k: int = 2
    m: float = 2.0
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0
    init: str = "spread"

    def __post_init__(self):
        if self.k < 1:
            raise FcmError("k must be at least 1")
        if not self.m > 1:
            raise FcmError("fuzzification degree m must exceed 1")
        if self.max_iter < 1:
            raise FcmError("max_iter must be at least 1")
        if not self.tol > 0:
            raise FcmError("tol must be positive")
        if self.init not in ("spread", "random"):
            raise FcmError(f"unknown init {self.init!r}")


@dataclass
class MembershipMatrix:
    """``values`` is K x N, each column sums to one."""

    values: np.ndarray
    centroids: np.ndarray
    n_iter: int
    converged: bool
    objective: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def spread_rows(n: int, k: int) -> np.ndarray:
    """0-based row positions ``ceil((2t - 1) n / 2k) - 1`` for ``t = 1..k``."""
    return np.array([max(0, math.ceil((2 * t - 1) * n / (2 * k)) - 1) for t in range(1, k + 1)])


def memberships(x: np.ndarray, centroids: np.ndarray, m: float) -> np.ndarray:
    """Membership update for fixed centroids.

    ``u[j, i] = 1 / sum_l (d_ij / d_il)^(2 / (m - 1))``. A point sitting
    on one or more centroids is shared equally among them and gets zero
    membership elsewhere.
    """
    d2 = ((x[None, :, :] - centroids[:, None, :]) ** 2).sum(axis=2)
    zero = d2 == 0
    u = np.empty_like(d2)
    hit = zero.any(axis=0)
    if np.any(~hit):
        # (d_ij/d_il)^(2/(m-1)) == (d2_ij/d2_il)^(1/(m-1))
        inv = d2[:, ~hit] ** (-1.0 / (m - 1.0))
        u[:, ~hit] = inv / inv.sum(axis=0)
    if np.any(hit):
        z = zero[:, hit].astype(float)
        u[:, hit] = z / z.sum(axis=0)
    return u


def centroids_from(x: np.ndarray, u: np.ndarray, m: float) -> np.ndarray:
    w = u ** m
    return (w @ x) / w.sum(axis=1, keepdims=True)


def objective(x: np.ndarray, u: np.ndarray, centroids: np.ndarray, m: float) -> float:
    d2 = ((x[None, :, :] - centroids[:, None, :]) ** 2).sum(axis=2)
    return float(np.sum((u ** m) * d2))


def fcm(data, params: FcmParams = FcmParams(), init_centroids=None, callback=None) -> MembershipMatrix:
    """Fuzzy C-means on the rows of ``data``.

    ``data`` is an N x p array, or a :class:`~czekan.czek_matrix.CzekMatrix`
    whose class rows are used as points. Starting centroids come from
    ``init_centroids`` if given, else ``params.init``: ``"spread"`` takes
    ``k`` evenly spaced rows, ``"random"`` draws ``k`` distinct rows with
    ``params.seed``. Iteration alternates the centroid and membership updates
    and stops once no membership moves by ``tol`` or more, or after
    ``max_iter`` rounds (``converged`` is then False).

    ``callback(iteration, u, centroids, objective)``, if given, is called
    after the initial membership step (iteration 0) and after every round.
    """
    x = np.asarray(getattr(data, "classes", data), dtype=float)
    if x.ndim != 2:
        raise FcmError("data must be a 2-D array")
    n = x.shape[0]
    k = params.k
    if k > n:
        raise FcmError(f"k={k} exceeds the number of points ({n})")

    if init_centroids is not None:
        c = np.array(init_centroids, dtype=float)
        if c.shape != (k, x.shape[1]):
            raise FcmError(f"init_centroids must have shape {(k, x.shape[1])}")
    elif params.init == "spread":
        c = x[spread_rows(n, k)].copy()
    else:
        rng = np.random.default_rng(params.seed)
        c = x[np.sort(rng.choice(n, size=k, replace=False))].copy()

    u = memberships(x, c, params.m)
    obj = [objective(x, u, c, params.m)]
    if callback is not None:
        callback(0, u, c, obj[-1])
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        c = centroids_from(x, u, params.m)
        u_new = memberships(x, c, params.m)
        obj.append(objective(x, u_new, c, params.m))
        delta = float(np.max(np.abs(u_new - u)))
        u = u_new
        if callback is not None:
            callback(it, u, c, obj[-1])
        if delta < params.tol:
            converged = True
            break
    return MembershipMatrix(values=u, centroids=c, n_iter=it, converged=converged, objective=obj)
