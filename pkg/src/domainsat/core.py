"""Core data model: typed containers and seeded sampling primitives.

Containers are frozen dataclasses holding read-only numpy arrays.
Construction only coerces dtypes; structural and value invariants are
checked explicitly by validate()/validate_predictions() so that loaders
and the service can report precise errors, and so that property tests
can build corrupted instances.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData,
    InvalidBatchSize,
    InvalidConfig,
    InvalidFraction,
    MissingLabels,
    RangeError,
    SchemaError,
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d numeric embedding/feature table with optional ids and labels.

    labels, when present, are 0 (normal) / 1 (tumor).
    """

    feature_names: tuple[str, ...]
    rows: np.ndarray
    sample_ids: tuple[str, ...] | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        try:
            rows = np.asarray(self.rows, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"feature rows are not numeric: {exc}") from None
        object.__setattr__(self, "rows", _freeze(rows))
        if self.sample_ids is not None:
            object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        if self.labels is not None:
            object.__setattr__(self, "labels", _freeze(np.asarray(self.labels, dtype=np.int64)))

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1]) if self.rows.ndim == 2 else 0


@dataclass(frozen=True)
class PredictionSet:
    """Per-sample positive-class probabilities with optional ids/labels."""

    p_positive: np.ndarray
    sample_ids: tuple[str, ...] | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        try:
            p = np.asarray(self.p_positive, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"probabilities are not numeric: {exc}") from None
        object.__setattr__(self, "p_positive", _freeze(p))
        if self.sample_ids is not None:
            object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        if self.labels is not None:
            object.__setattr__(self, "labels", _freeze(np.asarray(self.labels, dtype=np.int64)))

    @property
    def n(self) -> int:
        return int(self.p_positive.shape[0])


@dataclass(frozen=True)
class ShiftScore:
    """One metric outcome: raw value, optional baseline fold, per-feature detail."""

    metric_name: str
    raw_value: float
    fold_value: float | None = None
    detail: dict[str, float] | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftScore":
        return cls(**d)


@dataclass(frozen=True)
class FeatureTest:
    """Per-feature row of a multi-feature hypothesis test."""

    feature: str
    statistic: float
    p_value: float
    corrected_p: float
    tie_flag: bool = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTest":
        return cls(**d)


@dataclass(frozen=True)
class TestResult:
    """Suite outcome; statistic is the minimum corrected p across features."""

    __test__ = False  # keep pytest from collecting this dataclass

    test_name: str
    statistic: float
    p_value: float
    per_feature: tuple[FeatureTest, ...]
    alarm: bool
    alpha: float

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["per_feature"] = [ft.to_dict() for ft in self.per_feature]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TestResult":
        d = dict(d)
        d["per_feature"] = tuple(FeatureTest.from_dict(ft) for ft in d["per_feature"])
        return cls(**d)


@dataclass(frozen=True)
class BaselineProfile:
    """Mean in-distribution score per metric; the unit for fold normalisation.

    Values are floored at 1e-12 on construction so folds never divide by zero.
    """

    values: dict[str, float]
    n_batches: int
    batch_size: int
    seed: int
    stratified: bool = True

    FLOOR = 1e-12

    def __post_init__(self):
        if self.n_batches < 2:
            raise InvalidConfig(f"n_batches must be >= 2, got {self.n_batches}")
        floored = {str(k): max(float(v), self.FLOOR) for k, v in self.values.items()}
        object.__setattr__(self, "values", floored)

    def to_dict(self) -> dict:
        return {
            "kind": "baseline",
            "values": dict(self.values),
            "n_batches": self.n_batches,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "stratified": self.stratified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BaselineProfile":
        return cls(
            values=dict(d["values"]),
            n_batches=int(d["n_batches"]),
            batch_size=int(d["batch_size"]),
            seed=int(d["seed"]),
            stratified=bool(d.get("stratified", True)),
        )


@dataclass(frozen=True)
class CdiReport:
    """Confidence deviation indices for a reference/target pair of prediction sets."""

    cdi_m_ref: float
    cdi_m_target: float
    delta_cdi_m: float
    cdi_h_ref: float
    cdi_h_target: float
    delta_cdi_h: float
    boundary: float
    auc_ref: float | None = None
    auc_target: float | None = None
    delta_auc: float | None = None
    alarm: bool = False
    alarm_threshold: float = -0.02

    def to_dict(self) -> dict:
        from . import __version__

        # The computation is deterministic, so the envelope seed is fixed.
        return {
            "kind": "cdi",
            "version": __version__,
            "seed": 0,
            "config": {
                "boundary": self.boundary,
                "alarm_threshold": self.alarm_threshold,
            },
            "results": {
                "cdi_m_ref": self.cdi_m_ref,
                "cdi_m_target": self.cdi_m_target,
                "delta_cdi_m": self.delta_cdi_m,
                "cdi_h_ref": self.cdi_h_ref,
                "cdi_h_target": self.cdi_h_target,
                "delta_cdi_h": self.delta_cdi_h,
                "auc_ref": self.auc_ref,
                "auc_target": self.auc_target,
                "delta_auc": self.delta_auc,
                "alarm": self.alarm,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CdiReport":
        res = d["results"]
        cfg = d["config"]

        def opt(key):
            return None if res.get(key) is None else float(res[key])

        return cls(
            cdi_m_ref=float(res["cdi_m_ref"]),
            cdi_m_target=float(res["cdi_m_target"]),
            delta_cdi_m=float(res["delta_cdi_m"]),
            cdi_h_ref=float(res["cdi_h_ref"]),
            cdi_h_target=float(res["cdi_h_target"]),
            delta_cdi_h=float(res["delta_cdi_h"]),
            boundary=float(cfg["boundary"]),
            auc_ref=opt("auc_ref"),
            auc_target=opt("auc_target"),
            delta_auc=opt("delta_auc"),
            alarm=bool(res["alarm"]),
            alarm_threshold=float(cfg["alarm_threshold"]),
        )


@dataclass(frozen=True)
class HistogramSummary:
    """Shared-edge histogram of one selector over one or more named groups."""

    selector: str
    bin_edges: tuple[float, ...]
    counts_per_group: dict[str, tuple[float, ...]]
    normalized: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": "histogram",
            "selector": self.selector,
            "bin_edges": list(self.bin_edges),
            "counts_per_group": {k: list(v) for k, v in self.counts_per_group.items()},
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HistogramSummary":
        return cls(
            selector=d["selector"],
            bin_edges=tuple(float(x) for x in d["bin_edges"]),
            counts_per_group={k: tuple(float(x) for x in v) for k, v in d["counts_per_group"].items()},
            normalized=bool(d["normalized"]),
        )


def validate(matrix: FeatureMatrix) -> None:
    """Check every FeatureMatrix invariant; raise SchemaError/ValueError."""
    names = matrix.feature_names
    if len(names) == 0:
        raise SchemaError("feature_names is empty")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if list(names).count(n) > 1})
        raise SchemaError(f"duplicate feature names: {dupes}")
    rows = matrix.rows
    if rows.ndim != 2:
        raise SchemaError(f"rows must be 2-dimensional, got ndim={rows.ndim}")
    if rows.shape[0] < 1:
        raise SchemaError("matrix has no rows")
    if rows.shape[1] != len(names):
        raise SchemaError(
            f"row width {rows.shape[1]} does not match {len(names)} feature names"
        )
    if not np.isfinite(rows).all():
        i, j = np.argwhere(~np.isfinite(rows))[0]
        raise ValueError(f"non-finite value at row {int(i)}, column {names[int(j)]!r}")
    if matrix.sample_ids is not None and len(matrix.sample_ids) != rows.shape[0]:
        raise SchemaError(
            f"{len(matrix.sample_ids)} sample ids for {rows.shape[0]} rows"
        )
    if matrix.labels is not None:
        lab = matrix.labels
        if lab.shape != (rows.shape[0],):
            raise SchemaError(f"labels shape {lab.shape} does not match {rows.shape[0]} rows")
        bad = ~np.isin(lab, (0, 1))
        if bad.any():
            i = int(np.argwhere(bad)[0][0])
            raise ValueError(f"label outside {{0, 1}} at row {i}: {lab[i]}")


def validate_predictions(preds: PredictionSet) -> None:
    """Check every PredictionSet invariant; raise SchemaError/RangeError/ValueError."""
    p = preds.p_positive
    if p.ndim != 1:
        raise SchemaError(f"p_positive must be 1-dimensional, got ndim={p.ndim}")
    if p.shape[0] < 1:
        raise SchemaError("prediction set has no rows")
    if not np.isfinite(p).all():
        i = int(np.argwhere(~np.isfinite(p))[0][0])
        raise ValueError(f"non-finite probability at row {i}")
    if (p < 0.0).any() or (p > 1.0).any():
        i = int(np.argwhere((p < 0.0) | (p > 1.0))[0][0])
        raise RangeError(f"probability outside [0, 1] at row {i}: {p[i]}")
    if preds.sample_ids is not None and len(preds.sample_ids) != p.shape[0]:
        raise SchemaError(f"{len(preds.sample_ids)} sample ids for {p.shape[0]} rows")
    if preds.labels is not None:
        lab = preds.labels
        if lab.shape != (p.shape[0],):
            raise SchemaError(f"labels shape {lab.shape} does not match {p.shape[0]} rows")
        bad = ~np.isin(lab, (0, 1))
        if bad.any():
            i = int(np.argwhere(bad)[0][0])
            raise ValueError(f"label outside {{0, 1}} at row {i}: {lab[i]}")


def draw_indices(
    n_rows: int,
    n: int,
    labels: np.ndarray | None = None,
    class_ratio: float | None = None,
    with_replacement: bool = True,
    seed: int = 0,
) -> np.ndarray:
    """Seeded row-index draw, optionally stratified to an exact class ratio.

    With class_ratio r the draw contains exactly floor(n*r) positives and
    n - floor(n*r) negatives.  Returned indices are sorted ascending so a
    batch is a deterministic function of the seed only.
    """
    if n < 1:
        raise InvalidBatchSize(f"batch size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if class_ratio is None:
        if not with_replacement and n > n_rows:
            raise InsufficientData(f"requested {n} rows without replacement from {n_rows}")
        idx = rng.choice(n_rows, size=n, replace=with_replacement)
        return np.sort(idx)
    if labels is None:
        raise MissingLabels("class_ratio requested but the data has no labels")
    if not 0.0 < class_ratio < 1.0:
        raise InvalidFraction(f"class_ratio must be in (0, 1), got {class_ratio}")
    n_pos = int(np.floor(n * class_ratio))
    n_neg = n - n_pos
    pos_pool = np.flatnonzero(labels == 1)
    neg_pool = np.flatnonzero(labels == 0)
    for pool, want, name in ((pos_pool, n_pos, "positive"), (neg_pool, n_neg, "negative")):
        if want > 0 and pool.size == 0:
            raise InsufficientData(f"no {name} rows available")
        if not with_replacement and want > pool.size:
            raise InsufficientData(
                f"requested {want} {name} rows without replacement from {pool.size}"
            )
    pos_idx = pos_pool[rng.choice(pos_pool.size, size=n_pos, replace=with_replacement)]
    neg_idx = neg_pool[rng.choice(neg_pool.size, size=n_neg, replace=with_replacement)]
    return np.sort(np.concatenate([pos_idx, neg_idx]))


def take(matrix: FeatureMatrix, idx: np.ndarray) -> FeatureMatrix:
    """Row-subset a FeatureMatrix (ids/labels kept aligned)."""
    return FeatureMatrix(
        feature_names=matrix.feature_names,
        rows=matrix.rows[idx],
        sample_ids=None if matrix.sample_ids is None else tuple(matrix.sample_ids[i] for i in idx),
        labels=None if matrix.labels is None else matrix.labels[idx],
    )


def take_predictions(preds: PredictionSet, idx: np.ndarray) -> PredictionSet:
    """Row-subset a PredictionSet (ids/labels kept aligned)."""
    return PredictionSet(
        p_positive=preds.p_positive[idx],
        sample_ids=None if preds.sample_ids is None else tuple(preds.sample_ids[i] for i in idx),
        labels=None if preds.labels is None else preds.labels[idx],
    )


def sample_batch(
    matrix: FeatureMatrix,
    n: int,
    class_ratio: float | None = None,
    with_replacement: bool = True,
    seed: int = 0,
) -> FeatureMatrix:
    """Draw a seeded batch of n rows; every row is a row of the source."""
    idx = draw_indices(
        matrix.n, n, labels=matrix.labels, class_ratio=class_ratio,
        with_replacement=with_replacement, seed=seed,
    )
    return take(matrix, idx)


def split(matrix: FeatureMatrix, fraction: float, seed: int = 0) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Disjoint seeded partition; first part gets round(fraction * n) rows.

    Part sizes are clamped to [1, n-1] so both parts stay non-empty.
    """
    if not 0.0 < fraction < 1.0:
        raise InvalidFraction(f"fraction must be in (0, 1), got {fraction}")
    if matrix.n < 2:
        raise InsufficientData(f"cannot split {matrix.n} row(s)")
    k = int(round(fraction * matrix.n))
    k = min(max(k, 1), matrix.n - 1)
    perm = np.random.default_rng(seed).permutation(matrix.n)
    first = np.sort(perm[:k])
    second = np.sort(perm[k:])
    return take(matrix, first), take(matrix, second)


def split_indices(n_rows: int, fraction: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Index-level version of split(), for keeping aligned structures together."""
    if not 0.0 < fraction < 1.0:
        raise InvalidFraction(f"fraction must be in (0, 1), got {fraction}")
    if n_rows < 2:
        raise InsufficientData(f"cannot split {n_rows} row(s)")
    k = int(round(fraction * n_rows))
    k = min(max(k, 1), n_rows - 1)
    perm = np.random.default_rng(seed).permutation(n_rows)
    return np.sort(perm[:k]), np.sort(perm[k:])
