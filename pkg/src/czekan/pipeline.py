"""End-to-end Czekanowski clustering.

scale -> distances -> seriation -> class matrix -> fuzzy C-means ->
E-divisive on the membership columns -> contiguous clusters.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .changepoint import ChangePointSet, EDivParams, e_divisive
from .czek_matrix import CzekMatrix, czek_asymmetric, czek_symmetric
from .distance import DistanceMatrix, distance_matrix
from .fuzzy import FcmParams, MembershipMatrix, fcm
from .ingest import Dataset, ScalingSpec, zscore
from .seriation import METHODS, Seriation, seriate

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """All knobs of a run. Defaults reproduce the reference WBC setup."""

    method: str = "OLO_average"
    n_classes: int = 5
    probs: Optional[tuple[float, ...]] = None
    breaks: str = "quantile"
    mode: str = "symmetric"
    fractions: Optional[tuple[float, ...]] = None
    scale: bool = True
    metric: str = "euclidean"
    k: int = 2
    fuzziness: float = 2.0
    fcm_max_iter: int = 100
    fcm_tol: float = 1e-6
    fcm_init: str = "spread"
    sig_level: float = 0.05
    n_perm: int = 199
    min_size: int = 2
    alpha: float = 1.0
    max_cp: Optional[int] = None
    spin_max_iter: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.mode not in ("symmetric", "asymmetric"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        for name in ("probs", "fractions"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(float(x) for x in v))
        if self.k >= 2:
            self.fcm_params()
        self.edivisive_params()

    def fcm_params(self) -> FcmParams:
        return FcmParams(k=self.k, m=self.fuzziness, max_iter=self.fcm_max_iter,
                         tol=self.fcm_tol, seed=self.seed, init=self.fcm_init)

    def edivisive_params(self) -> EDivParams:
        max_cp = self.k - 1 if self.max_cp is None else self.max_cp
        return EDivParams(sig_level=self.sig_level, n_perm=self.n_perm, min_size=self.min_size,
                          alpha=self.alpha, max_changepoints=max_cp, seed=self.seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("probs", "fractions"):
            if d[name] is not None:
                d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ClusterResult:
    """Contiguous clusters over the seriated order.

    ``intervals`` are 1-based inclusive positions in the seriated order.
    ``labels`` follow the seriated order, ``labels_original_order`` the
    input rows.
    """

    intervals: list[tuple[int, int]]
    labels: np.ndarray
    labels_original_order: np.ndarray
    k_requested: int
    k_found: int

    @classmethod
    def from_changepoints(cls, cps: ChangePointSet, permutation: np.ndarray, k_requested: int) -> "ClusterResult":
        n = len(permutation)
        intervals = cps.segments(n)
        labels = np.empty(n, dtype=int)
        for lab, (a, b) in enumerate(intervals, start=1):
            labels[a - 1:b] = lab
        original = np.empty(n, dtype=int)
        original[np.asarray(permutation)] = labels
        return cls(intervals, labels, original, k_requested, len(intervals))

    def to_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "labels": self.labels.tolist(),
            "labels_original_order": self.labels_original_order.tolist(),
            "k_requested": self.k_requested,
            "k_found": self.k_found,
        }


@dataclass
class ClusteringRun:
    czek: CzekMatrix
    membership: MembershipMatrix
    changepoints: ChangePointSet
    clusters: ClusterResult
    distances: DistanceMatrix
    seriation: Seriation
    scaling: ScalingSpec
    config: RunConfig = field(default_factory=RunConfig)

    def __iter__(self):
        return iter((self.czek, self.membership, self.changepoints, self.clusters))


def build_diagram(ds: Dataset, cfg: RunConfig) -> tuple[CzekMatrix, DistanceMatrix, Seriation, ScalingSpec]:
    """Scale, measure, seriate and discretize: the diagram without clustering."""
    if cfg.scale:
        ds, scaling = zscore(ds)
    else:
        scaling = ScalingSpec(False)
    W = distance_matrix(ds, cfg.metric)
    ser = seriate(W, cfg.method, seed=cfg.seed, spin_max_iter=cfg.spin_max_iter)
    if cfg.mode == "symmetric":
        czek = czek_symmetric(W, ser.order, cfg.n_classes, cfg.probs, breaks=cfg.breaks)
    else:
        czek = czek_asymmetric(W, ser.order, cfg.n_classes, cfg.fractions)
    return czek, W, ser, scaling


def czekanowski_cluster(ds: Dataset, cfg: RunConfig = RunConfig(), threads: int = 1) -> ClusteringRun:
    """Run the full clustering and return every intermediate artifact."""
    if cfg.k > 1 and ds.n < 2 * cfg.min_size:
        raise ConfigError(f"need at least {2 * cfg.min_size} observations, got {ds.n}")
    czek, W, ser, scaling = build_diagram(ds, cfg)
    logger.info("seriated %d observations with %s", ds.n, cfg.method)
    if cfg.k == 1:
        membership = MembershipMatrix(np.ones((1, ds.n)), czek.classes.mean(axis=0, keepdims=True).astype(float),
                                      0, True, [])
        cps = ChangePointSet()
    else:
        membership = fcm(czek, cfg.fcm_params())
        if not membership.converged:
            logger.warning("fuzzy C-means stopped at max_iter=%d without converging", cfg.fcm_max_iter)
        cps = e_divisive(membership, cfg.edivisive_params(), threads=threads)
    clusters = ClusterResult.from_changepoints(cps, ser.order, cfg.k)
    if clusters.k_found < cfg.k:
        logger.info("only %d of %d requested clusters were significant", clusters.k_found, cfg.k)
    return ClusteringRun(czek, membership, cps, clusters, W, ser, scaling, cfg)
