"""Seriation: permutations that place similar observations next to each other.

Methods
-------
HC_ward
    Leaf order of a Ward dendrogram as built.
GW_ward
    Ward dendrogram with Gruvaeus-Wainer subtree orientation.
OLO_average, OLO_ward
    Optimal leaf ordering of an average / Ward dendrogram.
SPIN_NH
    Neighborhood variant of Sorting Points Into Neighborhoods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distance import DistanceMatrix

LINKAGES = ("average", "ward")
METHODS = ("OLO_average", "OLO_ward", "HC_ward", "GW_ward", "SPIN_NH")

_INF = np.inf


class SeriationError(ValueError):
    pass


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree over ``n`` leaves.

    Leaves are numbered ``0..n-1`` and the node created by merge ``s`` is
    ``n + s`` (the scipy linkage convention). ``merge[s]`` holds the
    (left, right) children in display order.
    """

    merge: np.ndarray
    height: np.ndarray
    linkage: str
    sizes: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.merge.shape[0] + 1

    def children(self, node: int) -> tuple[int, int]:
        a, b = self.merge[node - self.n]
        return int(a), int(b)

    @property
    def order(self) -> np.ndarray:
        """Left-to-right leaf order."""
        n = self.n
        if n == 1:
            return np.zeros(1, dtype=int)
        out = []
        stack = [2 * n - 2]
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                a, b = self.children(v)
                stack.append(b)
                stack.append(a)
        return np.array(out, dtype=int)

    def leaves(self, node: int) -> np.ndarray:
        if node < self.n:
            return np.array([node])
        out = []
        stack = [node]
        while stack:
            v = stack.pop()
            if v < self.n:
                out.append(v)
            else:
                a, b = self.children(v)
                stack.append(b)
                stack.append(a)
        return np.array(out, dtype=int)

    def to_linkage(self) -> np.ndarray:
        """scipy-style ``(n-1, 4)`` linkage matrix."""
        z = np.zeros((self.n - 1, 4))
        z[:, :2] = self.merge
        z[:, 2] = self.height
        z[:, 3] = self.sizes
        return z


def check_permutation(order, n: int) -> np.ndarray:
    order = np.asarray(order, dtype=int)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise SeriationError(f"not a permutation of 0..{n - 1}")
    return order


def hierarchical_cluster(W: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering with Lance-Williams updates.

    Uses the nearest-neighbour-list scheme of Murtagh's HCLUST routine (the
    one behind R's ``hclust``): at each step the globally closest pair of
    active clusters is merged, ties going to the lowest index. Ward works on
    squared distances and reports merge heights on that squared scale.

    Children of each merge are arranged as ``hclust`` displays them:
    singletons before clusters, lower observation index first for two
    singletons, earlier merge first for two clusters.
    """
    if linkage not in LINKAGES:
        raise SeriationError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    n = W.n
    if n < 2:
        raise SeriationError("hierarchical clustering needs at least 2 observations")
    ward = linkage == "ward"
    diss = np.array(W.values, dtype=float)
    if ward:
        diss = diss * diss
    active = np.ones(n, dtype=bool)
    membr = np.ones(n)
    nn = np.zeros(n, dtype=int)
    disnn = np.full(n, _INF)
    for i in range(n - 1):
        j = int(np.argmin(diss[i, i + 1:]))
        nn[i] = i + 1 + j
        disnn[i] = diss[i, i + 1 + j]

    node_of = np.arange(n)
    merge = np.zeros((n - 1, 2), dtype=int)
    height = np.zeros(n - 1)
    sizes = np.zeros(n - 1, dtype=int)
    idx = np.arange(n)
    jj = 0
    for s in range(n - 1):
        cand = np.where(active[: n - 1], disnn[: n - 1], _INF)
        im = int(np.argmin(cand))
        dmin = cand[im]
        jm = int(nn[im])
        i2, j2 = min(im, jm), max(im, jm)

        a, b = int(node_of[i2]), int(node_of[j2])
        if a >= n and b < n:
            a, b = b, a
        elif a >= n and b >= n and a > b:
            a, b = b, a
        merge[s] = (a, b)
        height[s] = dmin
        sizes[s] = membr[i2] + membr[j2]
        node_of[i2] = n + s
        active[j2] = False

        ks = idx[active & (idx != i2)]
        d1 = diss[i2, ks]
        d2 = diss[j2, ks]
        if ward:
            d12 = diss[i2, j2]
            mk = membr[ks]
            new = ((membr[i2] + mk) * d1 + (membr[j2] + mk) * d2 - mk * d12) / (membr[i2] + membr[j2] + mk)
        else:
            new = (membr[i2] * d1 + membr[j2] * d2) / (membr[i2] + membr[j2])
        diss[i2, ks] = new
        diss[ks, i2] = new

        right = ks > i2
        if np.any(right):
            r = int(np.argmin(new[right]))
            dnew, jj = new[right][r], int(ks[right][r])
        else:
            dnew = _INF
        left = ~right
        kl, nl = ks[left], new[left]
        better = nl < disnn[kl]
        disnn[kl[better]] = nl[better]
        nn[kl[better]] = i2

        membr[i2] += membr[j2]
        disnn[i2] = dnew
        nn[i2] = jj

        stale = np.nonzero(active[: n - 1] & ((nn[: n - 1] == i2) | (nn[: n - 1] == j2)))[0]
        for i in stale:
            row = np.where(active[i + 1:], diss[i, i + 1:], _INF)
            j = int(np.argmin(row))
            if row[j] < _INF:
                nn[i] = i + 1 + j
                disnn[i] = row[j]
            else:
                disnn[i] = _INF
    return Dendrogram(merge=merge, height=height, linkage=linkage, sizes=sizes)


def hc_order(tree: Dendrogram) -> np.ndarray:
    """Leaf order of ``tree`` with no reorientation."""
    return tree.order


def _check_sizes(W: DistanceMatrix, tree: Dendrogram):
    if W.n != tree.n:
        raise SeriationError(f"distance matrix has {W.n} rows but tree has {tree.n} leaves")


def gw_order(W: DistanceMatrix, tree: Dendrogram) -> np.ndarray:
    """Gruvaeus-Wainer orientation of ``tree``.

    Merges are visited bottom-up. Each child subtree may be flipped so that
    the two leaves meeting at the junction are the closest pair among the
    subtrees' end leaves. On ties the current orientation is kept, then the
    left subtree is flipped before the right one.
    """
    _check_sizes(W, tree)
    n, D = tree.n, W.values
    if n == 1:
        return np.zeros(1, dtype=int)
    ends: dict[int, tuple[int, int]] = {}
    flip = np.zeros((n - 1, 2), dtype=bool)

    def end(v):
        return (v, v) if v < n else ends[v]

    for s, (a, b) in enumerate(tree.merge):
        a, b = int(a), int(b)
        if a < n and b < n:
            ends[n + s] = (a, b)
            continue
        a1, a2 = end(a)
        b1, b2 = end(b)
        if a < n:
            if D[a, b1] < D[a, b2]:
                ends[n + s] = (a, b2)
            else:
                ends[n + s] = (a, b1)
                flip[s, 1] = True
        elif b < n:
            if D[b, a1] < D[b, a2]:
                ends[n + s] = (a2, b)
                flip[s, 0] = True
            else:
                ends[n + s] = (a1, b)
        else:
            d11, d12, d21, d22 = D[a1, b1], D[a1, b2], D[a2, b1], D[a2, b2]
            dmin = min(d11, d12, d21, d22)
            if dmin == d21:
                ends[n + s] = (a1, b2)
            elif dmin == d11:
                ends[n + s] = (a2, b2)
                flip[s, 0] = True
            elif dmin == d12:
                ends[n + s] = (a2, b1)
                flip[s] = True
            else:
                ends[n + s] = (a1, b1)
                flip[s, 1] = True

    out = []
    stack = [(2 * n - 2, False)]
    while stack:
        v, rev = stack.pop()
        if v < n:
            out.append(v)
            continue
        s = v - n
        a, b = tree.merge[s]
        seq = [(int(a), bool(flip[s, 0]) ^ rev), (int(b), bool(flip[s, 1]) ^ rev)]
        if rev:
            seq.reverse()
        stack.append(seq[1])
        stack.append(seq[0])
    return np.array(out, dtype=int)


def _minplus(A: np.ndarray, B: np.ndarray, block: int = 1 << 22) -> tuple[np.ndarray, np.ndarray]:
    """Min-plus product ``C[i,k] = min_j A[i,j] + B[j,k]`` and its argmin."""
    p, q = A.shape
    r = B.shape[1]
    C = np.empty((p, r))
    arg = np.empty((p, r), dtype=np.int32)
    step = max(1, block // max(1, q * r))
    for lo in range(0, p, step):
        t = A[lo:lo + step, :, None] + B[None, :, :]
        am = np.argmin(t, axis=1)
        arg[lo:lo + step] = am
        C[lo:lo + step] = np.take_along_axis(t, am[:, None, :], axis=1)[:, 0, :]
    return C, arg


def olo_order(W: DistanceMatrix, tree: Dendrogram) -> np.ndarray:
    """Optimal leaf ordering of ``tree`` (Bar-Joseph et al. dynamic program).

    For every node ``v`` with children ``a`` and ``b`` and every pair of end
    leaves ``u`` in ``a``, ``w`` in ``b``, the cheapest tree-consistent path
    from ``u`` to ``w`` is::

        M[v](u, w) = min_{m in a, k in b} M[a](u, m) + W[m, k] + M[b](k, w)

    split into two min-plus products, so the total cost is O(N^3). Ties go
    to the first candidate in the tree's own leaf order.
    """
    _check_sizes(W, tree)
    n, D = tree.n, W.values
    if n == 1:
        return np.zeros(1, dtype=int)
    if n == 2:
        return tree.order

    leaves: dict[int, np.ndarray] = {i: np.array([i]) for i in range(n)}
    cost: dict[int, np.ndarray] = {i: np.zeros((1, 1)) for i in range(n)}
    inner_arg: dict[int, np.ndarray] = {}
    outer_arg: dict[int, np.ndarray] = {}

    for s, (a, b) in enumerate(tree.merge):
        a, b = int(a), int(b)
        la, lb = leaves.pop(a), leaves.pop(b)
        ma, mb = cost.pop(a), cost.pop(b)
        t, targ = _minplus(ma, D[np.ix_(la, lb)])
        r, rarg = _minplus(t, mb)
        na, nb = la.size, lb.size
        m = np.full((na + nb, na + nb), _INF)
        m[:na, na:] = r
        m[na:, :na] = r.T
        v = n + s
        leaves[v] = np.concatenate([la, lb])
        cost[v] = m
        inner_arg[v] = targ
        outer_arg[v] = rarg

    root = 2 * n - 2
    root_leaves = leaves[root]
    flat = int(np.argmin(cost[root]))
    u0, w0 = root_leaves[flat // n], root_leaves[flat % n]

    out = []
    stack = [(root, int(u0), int(w0))]
    while stack:
        v, u, w = stack.pop()
        if v < n:
            out.append(v)
            continue
        a, b = tree.children(v)
        la, lb = tree.leaves(a), tree.leaves(b)
        if np.any(la == u):
            pu, pw = int(np.nonzero(la == u)[0][0]), int(np.nonzero(lb == w)[0][0])
            pk = int(outer_arg[v][pu, pw])
            pm = int(inner_arg[v][pu, pk])
            m_leaf, k_leaf = int(la[pm]), int(lb[pk])
            stack.append((b, k_leaf, w))
            stack.append((a, u, m_leaf))
        else:
            # path from u (in b) to w (in a): mirror the a->b solution for (w, u)
            pw, pu = int(np.nonzero(la == w)[0][0]), int(np.nonzero(lb == u)[0][0])
            pk = int(outer_arg[v][pw, pu])
            pm = int(inner_arg[v][pw, pk])
            m_leaf, k_leaf = int(la[pm]), int(lb[pk])
            stack.append((a, m_leaf, w))
            stack.append((b, u, k_leaf))
    return np.array(out, dtype=int)


@dataclass
class SpinResult:
    order: np.ndarray
    energies: list[float]
    sigmas: list[float]
    iterations: int


def band_weights(n: int, sigma: float, balance_iter: int = 50) -> np.ndarray:
    """Gaussian band ``exp(-(i - j)^2 / (n sigma))`` scaled towards a doubly
    stochastic matrix by Sinkhorn balancing."""
    pos = np.arange(n, dtype=float)
    H = np.exp(-((pos[:, None] - pos[None, :]) ** 2) / (n * sigma))
    for _ in range(balance_iter):
        H /= H.sum(axis=1, keepdims=True)
        H /= H.sum(axis=0, keepdims=True)
    return H


def spin_energy(D: np.ndarray, order: np.ndarray, H: np.ndarray) -> float:
    """``trace(P D P^T H)`` for the permutation ``order``."""
    return float(np.sum(D[np.ix_(order, order)] * H))


def spin_nh_order(
    W: DistanceMatrix,
    seed: int = 0,
    max_iter: int = 50,
    sigmas: Optional[Sequence[float]] = None,
    steps: int = 5,
    initial: Optional[np.ndarray] = None,
) -> SpinResult:
    """Neighborhood SPIN.

    Each round computes ``M = D_pi H`` for the band ``H`` of
    :func:`band_weights`, sends every row to the column holding its smallest
    ``M`` entry and sorts rows by that target; rows with equal targets are
    shuffled with the seeded generator. The band narrows through ``sigmas``
    (default 20 down to 1 in ten steps) with ``steps`` rounds per width and
    at most ``max_iter`` rounds overall. After each width the order with the
    lowest energy ``trace(P D P^T H)`` seen at that width is kept.

    ``initial`` defaults to the input order. ``energies`` lists the best
    energy per width after every round.
    """
    n = W.n
    if n < 2:
        raise SeriationError("SPIN needs at least 2 observations")
    if sigmas is None:
        sigmas = np.linspace(20.0, 1.0, 10).tolist()
    sigmas = [float(s) for s in sigmas]
    if any(not s > 0 for s in sigmas):
        raise SeriationError("SPIN band widths must be positive")
    D = W.values
    rng = np.random.default_rng(seed)
    perm = np.arange(n) if initial is None else check_permutation(initial, n)
    energies = []
    used = 0
    for sigma in sigmas:
        if used >= max_iter:
            break
        H = band_weights(n, sigma)
        best, best_e = perm, spin_energy(D, perm, H)
        energies.append(best_e)
        for _ in range(steps):
            if used >= max_iter:
                break
            used += 1
            target = np.argmin(D[np.ix_(perm, perm)] @ H, axis=1)
            perm = perm[np.lexsort((rng.permutation(n), target))]
            e = spin_energy(D, perm, H)
            if e < best_e:
                best, best_e = perm, e
            energies.append(best_e)
        perm = best
    return SpinResult(order=perm, energies=energies, sigmas=sigmas, iterations=used)


@dataclass
class Seriation:
    method: str
    order: np.ndarray
    tree: Optional[Dendrogram] = None
    info: dict = field(default_factory=dict)


def seriate(W: DistanceMatrix, method: str = "OLO_average", seed: int = 0, spin_max_iter: int = 50) -> Seriation:
    """Dispatch on a method name from :data:`METHODS`."""
    if method not in METHODS:
        raise SeriationError(f"unknown seriation method {method!r}; choose from {METHODS}")
    if W.n == 1:
        return Seriation(method, np.zeros(1, dtype=int))
    if method == "SPIN_NH":
        res = spin_nh_order(W, seed=seed, max_iter=spin_max_iter)
        info = {"seed": seed, "sigmas": res.sigmas, "steps_per_sigma": 5, "iterations": res.iterations,
                "max_iter": spin_max_iter, "band": "sinkhorn-balanced exp(-(i-j)^2/(n*sigma))",
                "final_energy": res.energies[-1] if res.energies else None}
        return Seriation(method, res.order, None, info)
    kind, linkage = method.split("_")
    tree = hierarchical_cluster(W, linkage)
    if kind == "OLO":
        order = olo_order(W, tree)
    elif kind == "GW":
        order = gw_order(W, tree)
    else:
        order = hc_order(tree)
    return Seriation(method, order, tree, {"linkage": linkage})
