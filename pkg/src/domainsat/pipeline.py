"""End-to-end analyses: shift reports, batched studies, histograms.

A shift report runs any selection of distance metrics, per-feature
hypothesis tests, and ML detectors on one reference/target pair,
attaching fold scores when a baseline profile is available.  A batched
study repeats the batch protocol against a labeled prediction stream:
n_batches target batches are drawn (50:50 stratified when labels
exist), each scored against the full reference, with confidence deltas
and, when labels exist, the AUC delta per batch.

Per-algorithm runtime failures (say, a singular covariance for the
Mahalanobis metric) are recorded in the report's errors mapping and do
not abort the remaining algorithms.  Only structural problems such as
mismatched dimensions abort the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .baseline import build_baseline, normalize_score
from .cdi import auc, cdi_entropy, cdi_margin
from .core import (
    BaselineProfile,
    FeatureMatrix,
    HistogramSummary,
    PredictionSet,
    ShiftScore,
    TestResult,
    draw_indices,
    take,
    take_predictions,
)
from .errors import (
    DimensionMismatch,
    InvalidConfig,
    MissingLabels,
    SchemaError,
    ToolboxError,
    UnknownFeature,
    UnknownMetric,
)
from .ml_detectors import DetectorResult
from .registry import (
    ConfigBundle,
    DEFAULT_STUDY_METRICS,
    DETECTOR_IDS,
    METRIC_IDS,
    TEST_IDS,
    build_configs,
    run_detector,
    run_metric,
    run_scalar,
    run_test,
)
from .shift_metrics import kl_per_feature, js_per_feature, wasserstein_per_feature


@dataclass(frozen=True)
class ShiftReport:
    scores: tuple[ShiftScore, ...]
    tests: tuple[TestResult, ...]
    detectors: tuple[DetectorResult, ...]
    errors: dict[str, str]
    baseline: BaselineProfile | None
    config: dict
    seed: int
    alarm: bool

    def to_dict(self) -> dict:
        return {
            "kind": "shift",
            "version": __version__,
            "seed": self.seed,
            "config": dict(self.config),
            "results": {
                "scores": [s.to_dict() for s in self.scores],
                "tests": [t.to_dict() for t in self.tests],
                "detectors": [d.to_dict() for d in self.detectors],
                "errors": dict(self.errors),
                "baseline": None if self.baseline is None else self.baseline.to_dict(),
                "alarm": self.alarm,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftReport":
        res = d["results"]
        return cls(
            scores=tuple(ShiftScore.from_dict(s) for s in res["scores"]),
            tests=tuple(TestResult.from_dict(t) for t in res["tests"]),
            detectors=tuple(DetectorResult.from_dict(x) for x in res["detectors"]),
            errors=dict(res["errors"]),
            baseline=None
            if res["baseline"] is None
            else BaselineProfile.from_dict(res["baseline"]),
            config=dict(d["config"]),
            seed=int(d["seed"]),
            alarm=bool(res["alarm"]),
        )


@dataclass(frozen=True)
class BatchRecord:
    batch_index: int  # 1-based, matching how batches are reported
    folds: dict[str, float]
    delta_cdi_m: float
    delta_cdi_h: float
    delta_auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "batch_index": self.batch_index,
            "folds": dict(self.folds),
            "delta_cdi_m": self.delta_cdi_m,
            "delta_cdi_h": self.delta_cdi_h,
            "delta_auc": self.delta_auc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BatchRecord":
        return cls(
            batch_index=int(d["batch_index"]),
            folds={k: float(v) for k, v in d["folds"].items()},
            delta_cdi_m=float(d["delta_cdi_m"]),
            delta_cdi_h=float(d["delta_cdi_h"]),
            delta_auc=None if d.get("delta_auc") is None else float(d["delta_auc"]),
        )


@dataclass(frozen=True)
class BatchedStudyReport:
    records: tuple[BatchRecord, ...]
    aggregates: dict[str, dict[str, float]]
    reference: dict
    baseline: BaselineProfile
    config: dict
    seed: int
    alarm: bool

    def to_dict(self) -> dict:
        return {
            "kind": "study",
            "version": __version__,
            "seed": self.seed,
            "config": dict(self.config),
            "results": {
                "records": [r.to_dict() for r in self.records],
                "aggregates": {k: dict(v) for k, v in self.aggregates.items()},
                "reference": dict(self.reference),
                "baseline": self.baseline.to_dict(),
                "alarm": self.alarm,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BatchedStudyReport":
        res = d["results"]
        return cls(
            records=tuple(BatchRecord.from_dict(r) for r in res["records"]),
            aggregates={k: dict(v) for k, v in res["aggregates"].items()},
            reference=dict(res["reference"]),
            baseline=BaselineProfile.from_dict(res["baseline"]),
            config=dict(d["config"]),
            seed=int(d["seed"]),
            alarm=bool(res["alarm"]),
        )


def _dedupe(ids) -> list[str]:
    seen = []
    for algo_id in ids or ():
        if algo_id not in seen:
            seen.append(algo_id)
    return seen


_PER_FEATURE_FN = {
    "wasserstein": wasserstein_per_feature,
    "kl_divergence": kl_per_feature,
    "js_divergence": js_per_feature,
}


def _metric_detail(metric_id, ref, tgt, bundle) -> dict | None:
    fn = _PER_FEATURE_FN.get(metric_id)
    if fn is None:
        return None
    ref_rows = np.asarray(getattr(ref, "rows", ref), dtype=np.float64)
    tgt_rows = np.asarray(getattr(tgt, "rows", tgt), dtype=np.float64)
    if metric_id == "wasserstein":
        values = fn(ref_rows, tgt_rows)
    else:
        values = fn(ref_rows, tgt_rows, bundle.metric)
    names = getattr(ref, "feature_names", None) or [
        f"f{j}" for j in range(ref_rows.shape[1])
    ]
    return {str(name): float(v) for name, v in zip(names, values)}


def run_shift_analysis(
    ref,
    tgt,
    metric_ids=(),
    test_ids=(),
    detector_ids=(),
    bundle: ConfigBundle | None = None,
    profile: BaselineProfile | None = None,
    seed: int = 0,
) -> ShiftReport:
    """Run the selected algorithms on one reference/target pair."""
    bundle = bundle or build_configs(seed=seed)
    ref_rows = np.asarray(getattr(ref, "rows", ref), dtype=np.float64)
    tgt_rows = np.asarray(getattr(tgt, "rows", tgt), dtype=np.float64)
    if ref_rows.ndim != 2 or tgt_rows.ndim != 2:
        raise SchemaError("reference and target must be 2-D feature tables")
    if ref_rows.shape[1] != tgt_rows.shape[1]:
        raise DimensionMismatch(
            f"reference has {ref_rows.shape[1]} features, target has {tgt_rows.shape[1]}"
        )
    metric_ids = _dedupe(metric_ids)
    test_ids = _dedupe(test_ids)
    detector_ids = _dedupe(detector_ids)
    for ids, family in (
        (metric_ids, METRIC_IDS),
        (test_ids, TEST_IDS),
        (detector_ids, DETECTOR_IDS),
    ):
        for algo_id in ids:
            if algo_id not in family:
                raise UnknownMetric(
                    f"unknown algorithm {algo_id!r}; valid ids here: "
                    + ", ".join(family)
                )

    scores: list[ShiftScore] = []
    tests: list[TestResult] = []
    detectors: list[DetectorResult] = []
    errors: dict[str, str] = {}

    for metric_id in metric_ids:
        try:
            raw = run_metric(metric_id, ref, tgt, bundle.metric)
            fold = None
            if profile is not None and metric_id in profile.values:
                fold = normalize_score(raw, metric_id, profile)
            scores.append(
                ShiftScore(
                    metric_name=metric_id,
                    raw_value=raw,
                    fold_value=fold,
                    detail=_metric_detail(metric_id, ref, tgt, bundle),
                )
            )
        except ToolboxError as exc:
            errors[metric_id] = str(exc)

    for test_id in test_ids:
        try:
            tests.append(run_test(test_id, ref, tgt, bundle.test))
        except ToolboxError as exc:
            errors[test_id] = str(exc)

    for detector_id in detector_ids:
        try:
            detectors.append(run_detector(detector_id, ref, tgt, bundle.detector))
        except ToolboxError as exc:
            errors[detector_id] = str(exc)

    config = {
        "metrics": list(metric_ids),
        "tests": list(test_ids),
        "detectors": list(detector_ids),
        "params": dict(bundle.params),
        "n_reference": int(ref_rows.shape[0]),
        "n_target": int(tgt_rows.shape[0]),
        "n_features": int(ref_rows.shape[1]),
    }
    return ShiftReport(
        scores=tuple(scores),
        tests=tuple(tests),
        detectors=tuple(detectors),
        errors=errors,
        baseline=profile,
        config=config,
        seed=seed,
        alarm=any(t.alarm for t in tests),
    )


def _check_aligned(features, predictions, side: str):
    if features.n != predictions.p_positive.shape[0]:
        raise SchemaError(
            f"{side} features have {features.n} rows but predictions have "
            f"{predictions.p_positive.shape[0]}"
        )


def run_batched_study(
    ref_features: FeatureMatrix,
    ref_predictions: PredictionSet,
    tgt_features: FeatureMatrix,
    tgt_predictions: PredictionSet,
    metric_ids=DEFAULT_STUDY_METRICS,
    bundle: ConfigBundle | None = None,
    profile: BaselineProfile | None = None,
    n_batches: int = 20,
    batch_size: int = 5000,
    seed: int = 0,
) -> BatchedStudyReport:
    """Fold scores plus confidence/AUC deltas over sampled target batches.

    Batches are drawn with replacement (batch b uses seed + b) and each
    is compared against the full reference.  The reference confidence
    indices and AUC are computed once on the full reference predictions;
    a baseline profile is built here (same batch protocol on the
    reference) when one is not supplied.
    """
    bundle = bundle or build_configs(seed=seed)
    metric_ids = _dedupe(metric_ids)
    if not metric_ids:
        raise InvalidConfig("metric_ids must not be empty")
    foldable = METRIC_IDS + DETECTOR_IDS
    for algo_id in metric_ids:
        if algo_id not in foldable:
            raise UnknownMetric(
                f"unknown algorithm {algo_id!r}; valid ids here: "
                + ", ".join(foldable)
            )
    _check_aligned(ref_features, ref_predictions, "reference")
    _check_aligned(tgt_features, tgt_predictions, "target")
    if ref_features.d != tgt_features.d:
        raise DimensionMismatch(
            f"reference has {ref_features.d} features, target has {tgt_features.d}"
        )
    if profile is None:
        profile = build_baseline(
            ref_features, metric_ids, bundle,
            n_batches=n_batches, batch_size=batch_size, seed=seed,
        )

    boundary = bundle.cdi.boundary
    cdi_m_ref = cdi_margin(ref_predictions, boundary)
    cdi_h_ref = cdi_entropy(ref_predictions)
    labeled = (
        ref_predictions.labels is not None and tgt_predictions.labels is not None
    )
    auc_ref = auc(ref_predictions) if labeled else None

    stratified = tgt_features.labels is not None
    records: list[BatchRecord] = []
    for b in range(n_batches):
        idx = draw_indices(
            tgt_features.n,
            batch_size,
            labels=tgt_features.labels,
            class_ratio=0.5 if stratified else None,
            with_replacement=True,
            seed=seed + b,
        )
        batch_feats = take(tgt_features, idx)
        batch_preds = take_predictions(tgt_predictions, idx)
        folds = {}
        for metric_id in metric_ids:
            raw = run_scalar(metric_id, ref_features, batch_feats, bundle)
            folds[metric_id] = normalize_score(raw, metric_id, profile)
        records.append(
            BatchRecord(
                batch_index=b + 1,
                folds=folds,
                delta_cdi_m=cdi_margin(batch_preds, boundary) - cdi_m_ref,
                delta_cdi_h=cdi_entropy(batch_preds) - cdi_h_ref,
                delta_auc=(auc(batch_preds) - auc_ref) if labeled else None,
            )
        )

    columns: dict[str, list[float]] = {}
    for metric_id in metric_ids:
        columns[f"fold_{metric_id}"] = [r.folds[metric_id] for r in records]
    columns["delta_cdi_m"] = [r.delta_cdi_m for r in records]
    columns["delta_cdi_h"] = [r.delta_cdi_h for r in records]
    if labeled:
        columns["delta_auc"] = [r.delta_auc for r in records]
    aggregates = {
        name: {"mean": float(np.mean(vals)), "std": float(np.std(vals))}
        for name, vals in columns.items()
    }
    alarm = aggregates["delta_cdi_m"]["mean"] < bundle.cdi.alarm_delta_margin

    config = {
        "metrics": list(metric_ids),
        "n_batches": int(n_batches),
        "batch_size": int(batch_size),
        "params": dict(bundle.params),
        "sampling": "with_replacement",
        "stratified": stratified,
        "n_reference": int(ref_features.n),
        "n_target": int(tgt_features.n),
        "n_features": int(ref_features.d),
        "alarm_delta_margin": bundle.cdi.alarm_delta_margin,
    }
    reference = {
        "cdi_m": cdi_m_ref,
        "cdi_h": cdi_h_ref,
        "auc": auc_ref,
        "boundary": boundary,
    }
    return BatchedStudyReport(
        records=tuple(records),
        aggregates=aggregates,
        reference=reference,
        baseline=profile,
        config=config,
        seed=seed,
        alarm=alarm,
    )


LABEL_SPLIT_SELECTOR = "p_positive split by label"
_LABEL_GROUP_NAMES = {0: "true normal", 1: "true tumor"}


def _selector_values(obj, selector: str) -> dict[str, np.ndarray]:
    """Resolve a selector on one dataset; returns sub-series by suffix."""
    if selector == "p_positive":
        if not isinstance(obj, PredictionSet):
            raise UnknownFeature("selector 'p_positive' needs a prediction dataset")
        return {"": np.asarray(obj.p_positive, dtype=np.float64)}
    if selector == LABEL_SPLIT_SELECTOR:
        if not isinstance(obj, PredictionSet):
            raise UnknownFeature(f"selector {selector!r} needs a prediction dataset")
        if obj.labels is None:
            raise MissingLabels("label split requested but the data has no labels")
        p = np.asarray(obj.p_positive, dtype=np.float64)
        return {
            f": {name}": p[obj.labels == value]
            for value, name in _LABEL_GROUP_NAMES.items()
        }
    if isinstance(obj, FeatureMatrix):
        if selector not in obj.feature_names:
            raise UnknownFeature(
                f"feature {selector!r} not present; features: "
                + ", ".join(obj.feature_names)
            )
        j = obj.feature_names.index(selector)
        return {"": np.asarray(obj.rows[:, j], dtype=np.float64)}
    raise UnknownFeature(
        f"selector {selector!r} cannot be resolved on a prediction dataset"
    )


def feature_histogram(
    groups,
    selector: str,
    bins: int = 50,
    normalized: bool = False,
) -> HistogramSummary:
    """Shared-edge histogram of one selector across named datasets.

    groups is a list of (name, FeatureMatrix | PredictionSet) pairs.  The
    label-split selector expands each group into "name: true normal" and
    "name: true tumor" series.  All series share bin edges computed from
    the pooled value range (a degenerate range widens to +-0.5).
    """
    if bins < 1:
        raise InvalidConfig(f"bins must be >= 1, got {bins}")
    series: list[tuple[str, np.ndarray]] = []
    for name, obj in groups:
        for suffix, values in _selector_values(obj, selector).items():
            series.append((f"{name}{suffix}", values))
    if not series:
        raise InvalidConfig("at least one group is required")
    pooled = np.concatenate([v for _, v in series if v.size > 0])
    if pooled.size == 0:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = float(pooled.min()), float(pooled.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    counts_per_group = {}
    for name, values in series:
        counts, _ = np.histogram(values, bins=edges)
        counts = counts.astype(np.float64)
        if normalized and values.size > 0:
            counts = counts / values.size
        counts_per_group[name] = tuple(float(c) for c in counts)
    return HistogramSummary(
        selector=selector,
        bin_edges=tuple(float(e) for e in edges),
        counts_per_group=counts_per_group,
        normalized=normalized,
    )
