"""Tabular data loading and z-score scaling."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MISSING_MARKERS = frozenset({"", "NA", "?"})


class IngestError(ValueError):
    """Raised when a data file cannot be turned into a Dataset."""


class ConstantFeature(IngestError):
    """Raised when a feature has zero spread and cannot be standardized."""

    def __init__(self, feature: str):
        super().__init__(f"feature {feature!r} is constant; cannot z-score it")
        self.feature = feature


@dataclass(frozen=True)
class Dataset:
    """Observation matrix with feature names, row ids and optional labels."""

    observations: np.ndarray
    feature_names: tuple[str, ...]
    row_ids: tuple[str, ...]
    labels: Optional[tuple[str, ...]] = None
    n_dropped: int = 0

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim != 2 or obs.shape[0] < 1 or obs.shape[1] < 1:
            raise IngestError(f"observations must be a non-empty 2-D matrix, got shape {obs.shape}")
        if not np.all(np.isfinite(obs)):
            raise IngestError("observations contain non-finite values")
        if len(self.feature_names) != obs.shape[1]:
            raise IngestError("feature_names length does not match the number of columns")
        if len(self.row_ids) != obs.shape[0]:
            raise IngestError("row_ids length does not match the number of rows")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise IngestError("row_ids must be unique")
        if self.labels is not None and len(self.labels) != obs.shape[0]:
            raise IngestError("labels length does not match the number of rows")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def p(self) -> int:
        return self.observations.shape[1]

    def take(self, index: Sequence[int]) -> "Dataset":
        """Return the dataset restricted/reordered to rows ``index``."""
        index = list(index)
        return Dataset(
            observations=self.observations[index],
            feature_names=self.feature_names,
            row_ids=tuple(self.row_ids[i] for i in index),
            labels=None if self.labels is None else tuple(self.labels[i] for i in index),
        )


@dataclass(frozen=True)
class ScalingSpec:
    enabled: bool
    per_feature_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    per_feature_sd: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "enabled": self.enabled,
            "per_feature_mean": [float(v) for v in self.per_feature_mean],
            "per_feature_sd": [float(v) for v in self.per_feature_sd],
        }


def _unique_ids(raw: list[str]) -> list[str]:
    # WBC repeats patient ids across visits; suffix repeats to keep ids unique.
    seen: dict[str, int] = {}
    out = []
    for r in raw:
        if r in seen:
            seen[r] += 1
            out.append(f"{r}#{seen[r]}")
        else:
            seen[r] = 1
            out.append(r)
    return out


def load_csv(
    path,
    label_column: Optional[str] = None,
    id_column: Optional[str] = None,
    missing_policy: str = "drop_row",
) -> Dataset:
    """Read a comma separated file with a header row into a :class:`Dataset`.

    Every column other than ``label_column`` and ``id_column`` is a numeric
    feature. Cells equal to one of ``MISSING_MARKERS`` count as missing; with
    ``missing_policy="drop_row"`` such rows are removed, with ``"error"`` they
    raise :class:`IngestError`.
    """
    if missing_policy not in ("drop_row", "error"):
        raise IngestError(f"unknown missing_policy {missing_policy!r}")
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise IngestError(f"{path} is empty")

    header = [h.strip() for h in rows[0]]
    for name, col in (("label_column", label_column), ("id_column", id_column)):
        if col is not None and col not in header:
            raise IngestError(f"{name} {col!r} not found in header of {path}")
    feature_idx = [i for i, h in enumerate(header) if h not in (label_column, id_column)]
    if not feature_idx:
        raise IngestError(f"{path} has no feature columns")

    values, ids, labels = [], [], []
    dropped = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise IngestError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        cells = [row[i].strip() for i in feature_idx]
        if any(c in MISSING_MARKERS for c in cells):
            if missing_policy == "error":
                raise IngestError(f"{path}:{lineno}: missing value")
            dropped += 1
            continue
        try:
            parsed = [float(c) for c in cells]
        except ValueError as exc:
            raise IngestError(f"{path}:{lineno}: non-numeric feature cell ({exc})") from exc
        if not all(math.isfinite(v) for v in parsed):
            raise IngestError(f"{path}:{lineno}: non-finite feature value")
        values.append(parsed)
        ids.append(row[header.index(id_column)].strip() if id_column else str(lineno - 1))
        if label_column:
            labels.append(row[header.index(label_column)].strip())

    if not values:
        raise IngestError(f"{path}: all rows dropped ({dropped} had missing values)")
    logger.info("loaded %d rows from %s (%d dropped for missing values)", len(values), path, dropped)
    return Dataset(
        observations=np.array(values, dtype=float),
        feature_names=tuple(header[i] for i in feature_idx),
        row_ids=tuple(_unique_ids(ids)),
        labels=tuple(labels) if label_column else None,
        n_dropped=dropped,
    )


def wbc_path() -> Path:
    """Path of the bundled Breast Cancer Wisconsin (Original) file."""
    return Path(str(resources.files("czekan") / "data" / "wbc_original.csv"))


def load_wbc() -> Dataset:
    """The 683 complete cases of the bundled WBC data, class labels '2'/'4'."""
    return load_csv(wbc_path(), label_column="class", id_column="id")


def zscore(ds: Dataset) -> tuple[Dataset, ScalingSpec]:
    """Standardize every feature to sample mean 0 and sample sd 1.

    The sd uses the ``n - 1`` denominator. Accumulation is exactly rounded
    (``math.fsum``) so the result does not depend on summation order.
    """
    x = ds.observations
    n = x.shape[0]
    if n < 2:
        raise IngestError("z-score needs at least two observations")
    means = np.array([math.fsum(col) / n for col in x.T])
    centered = x - means
    sds = np.array([math.sqrt(math.fsum(col * col) / (n - 1)) for col in centered.T])
    for name, sd in zip(ds.feature_names, sds):
        if not sd > 0:
            raise ConstantFeature(name)
    scaled = Dataset(
        observations=centered / sds,
        feature_names=ds.feature_names,
        row_ids=ds.row_ids,
        labels=ds.labels,
        n_dropped=ds.n_dropped,
    )
    return scaled, ScalingSpec(True, means, sds)
