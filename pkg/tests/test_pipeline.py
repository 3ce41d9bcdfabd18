import json

import numpy as np
import pytest

from domainsat.baseline import build_baseline
from domainsat.core import FeatureMatrix, PredictionSet
from domainsat.errors import (
    DimensionMismatch,
    MissingLabels,
    SchemaError,
    UnknownFeature,
    UnknownMetric,
)
from domainsat.model_head import ScenarioConfig, generate_scenario
from domainsat.pipeline import (
    BatchedStudyReport,
    ShiftReport,
    feature_histogram,
    run_batched_study,
    run_shift_analysis,
)
from domainsat.registry import METRIC_IDS, build_configs


def make_pair(n=120, d=3, offset=0.0, seed=0):
    rng = np.random.default_rng(seed)
    names = [f"f{j}" for j in range(d)]
    ref = FeatureMatrix(feature_names=names, rows=rng.normal(size=(n, d)))
    tgt = FeatureMatrix(feature_names=names, rows=rng.normal(loc=offset, size=(n, d)))
    return ref, tgt


def test_self_comparison_has_low_folds_and_no_alarms():
    rng = np.random.default_rng(1)
    ref = FeatureMatrix(
        feature_names=["a", "b"], rows=rng.normal(size=(200, 2)),
        labels=rng.integers(0, 2, size=200),
    )
    profile = build_baseline(ref, list(METRIC_IDS), n_batches=4, batch_size=80, seed=1)
    report = run_shift_analysis(
        ref, ref, metric_ids=METRIC_IDS, test_ids=("ks", "rank_sum"), profile=profile,
    )
    assert not report.alarm
    assert report.errors == {}
    for score in report.scores:
        assert 0.0 <= score.fold_value <= 2.0
    for test in report.tests:
        assert not test.alarm


def test_selection_contract_exact_entries():
    ref, tgt = make_pair(seed=2)
    report = run_shift_analysis(
        ref, tgt, metric_ids=("mmd",), detector_ids=("c2st_logistic",)
    )
    assert [s.metric_name for s in report.scores] == ["mmd"]
    assert [d.detector_name for d in report.detectors] == ["c2st_logistic"]
    assert report.tests == ()
    assert report.scores[0].fold_value is None  # no profile supplied


def test_duplicate_ids_run_once():
    ref, tgt = make_pair(seed=3)
    report = run_shift_analysis(ref, tgt, metric_ids=("mmd", "mmd", "wasserstein"))
    assert [s.metric_name for s in report.scores] == ["mmd", "wasserstein"]


def test_benign_scenario_flags_large_folds():
    id_fm, _, _ = generate_scenario(ScenarioConfig(kind="id", n=1200, d=8, seed=5))
    sh_fm, _, _ = generate_scenario(
        ScenarioConfig(kind="benign_shift", n=1200, d=8, shift_magnitude=5.0, seed=6)
    )
    metric_ids = ("mmd", "wasserstein", "mahalanobis")
    profile = build_baseline(id_fm, metric_ids, n_batches=5, batch_size=400, seed=5)
    report = run_shift_analysis(
        id_fm, sh_fm, metric_ids=metric_ids,
        detector_ids=("c2st_logistic",), profile=profile,
    )
    folds = {s.metric_name: s.fold_value for s in report.scores}
    assert folds["mmd"] >= 5.0
    assert folds["wasserstein"] >= 5.0
    assert folds["mahalanobis"] >= 1.5
    assert report.detectors[0].score >= 0.99  # fully separable domains


def test_per_algorithm_failure_is_isolated():
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(60, 3))
    rows[:, 1] = rows[:, 0]  # exact duplicate column -> singular covariance
    names = ["a", "b", "c"]
    ref = FeatureMatrix(feature_names=names, rows=rows)
    tgt = FeatureMatrix(feature_names=names, rows=rows + 0.1)
    bundle = build_configs({"shrinkage": 0.0})
    report = run_shift_analysis(
        ref, tgt, metric_ids=("mahalanobis", "wasserstein"), bundle=bundle
    )
    assert [s.metric_name for s in report.scores] == ["wasserstein"]
    assert "mahalanobis" in report.errors
    assert "singular" in report.errors["mahalanobis"].lower()


def test_constant_feature_fails_only_chi2():
    rng = np.random.default_rng(8)
    rows_ref = rng.normal(size=(80, 2))
    rows_tgt = rng.normal(size=(80, 2))
    rows_ref[:, 1] = 5.0
    rows_tgt[:, 1] = 5.0
    names = ["x", "const"]
    ref = FeatureMatrix(feature_names=names, rows=rows_ref)
    tgt = FeatureMatrix(feature_names=names, rows=rows_tgt)
    report = run_shift_analysis(ref, tgt, test_ids=("ks", "chi2"))
    assert [t.test_name for t in report.tests] == ["ks"]
    assert set(report.errors) == {"chi2"}


def test_unknown_algorithm_aborts():
    ref, tgt = make_pair(seed=9)
    with pytest.raises(UnknownMetric):
        run_shift_analysis(ref, tgt, metric_ids=("energy_distance",))


def test_dimension_mismatch_aborts():
    ref, _ = make_pair(d=3, seed=10)
    tgt, _ = make_pair(d=2, seed=10)
    with pytest.raises(DimensionMismatch):
        run_shift_analysis(ref, tgt, metric_ids=("mmd",))


def test_shift_report_json_round_trip():
    rng = np.random.default_rng(11)
    ref = FeatureMatrix(
        feature_names=["a", "b"], rows=rng.normal(size=(150, 2)),
        labels=rng.integers(0, 2, size=150),
    )
    tgt = FeatureMatrix(
        feature_names=["a", "b"], rows=rng.normal(loc=0.8, size=(150, 2)),
    )
    profile = build_baseline(ref, ("mmd", "wasserstein"), n_batches=3, batch_size=50, seed=11)
    report = run_shift_analysis(
        ref, tgt, metric_ids=("mmd", "wasserstein"), test_ids=("ks",),
        detector_ids=("autoencoder",), profile=profile, seed=11,
    )
    blob = json.dumps(report.to_dict(), sort_keys=True)
    assert ShiftReport.from_dict(json.loads(blob)) == report


def scenario_study(kind, magnitude, n=1200, d=6, n_batches=6, batch_size=200, seed=31):
    id_fm, id_ps, _ = generate_scenario(ScenarioConfig(kind="id", n=n, d=d, seed=seed))
    sh_fm, sh_ps, _ = generate_scenario(
        ScenarioConfig(kind=kind, n=n, d=d, shift_magnitude=magnitude, seed=seed + 1)
    )
    return run_batched_study(
        id_fm, id_ps, sh_fm, sh_ps,
        metric_ids=("mmd", "wasserstein"),
        n_batches=n_batches, batch_size=batch_size, seed=seed,
    )


def test_study_shape_and_aggregate_recomputation():
    report = scenario_study("harmful_shift", 2.5)
    assert len(report.records) == 6
    assert [r.batch_index for r in report.records] == [1, 2, 3, 4, 5, 6]
    for column, stats in report.aggregates.items():
        if column.startswith("fold_"):
            metric = column[len("fold_"):]
            values = [r.folds[metric] for r in report.records]
        else:
            values = [getattr(r, column) for r in report.records]
        assert stats["mean"] == pytest.approx(np.mean(values), abs=1e-12)
        assert stats["std"] == pytest.approx(np.std(values), abs=1e-12)


def test_harmful_study_flags_every_batch():
    report = scenario_study("harmful_shift", 2.5)
    assert report.alarm
    for record in report.records:
        assert record.delta_cdi_m < 0
        assert record.delta_auc < 0


def test_self_study_centers_deltas_at_zero():
    id_fm, id_ps, _ = generate_scenario(ScenarioConfig(kind="id", n=1500, d=4, seed=13))
    report = run_batched_study(
        id_fm, id_ps, id_fm, id_ps,
        metric_ids=("wasserstein",), n_batches=20, batch_size=300, seed=13,
    )
    assert abs(report.aggregates["delta_cdi_m"]["mean"]) <= 0.01
    assert abs(report.aggregates["delta_auc"]["mean"]) <= 0.01
    assert not report.alarm


def test_unlabeled_study_skips_auc_and_stratification():
    rng = np.random.default_rng(14)
    names = ["a", "b"]
    ref_fm = FeatureMatrix(feature_names=names, rows=rng.normal(size=(300, 2)))
    tgt_fm = FeatureMatrix(feature_names=names, rows=rng.normal(size=(300, 2)))
    ref_ps = PredictionSet(p_positive=rng.uniform(size=300))
    tgt_ps = PredictionSet(p_positive=rng.uniform(size=300))
    report = run_batched_study(
        ref_fm, ref_ps, tgt_fm, tgt_ps,
        metric_ids=("wasserstein",), n_batches=3, batch_size=50, seed=14,
    )
    assert all(r.delta_auc is None for r in report.records)
    assert "delta_auc" not in report.aggregates
    assert report.config["stratified"] is False
    assert report.reference["auc"] is None


def test_study_reuses_supplied_profile_and_is_deterministic():
    id_fm, id_ps, _ = generate_scenario(ScenarioConfig(kind="id", n=600, d=3, seed=15))
    profile = build_baseline(id_fm, ("wasserstein",), n_batches=3, batch_size=100, seed=15)
    kwargs = dict(
        metric_ids=("wasserstein",), profile=profile,
        n_batches=3, batch_size=100, seed=15,
    )
    a = run_batched_study(id_fm, id_ps, id_fm, id_ps, **kwargs)
    b = run_batched_study(id_fm, id_ps, id_fm, id_ps, **kwargs)
    assert a == b
    assert a.baseline is profile


def test_study_json_round_trip():
    report = scenario_study("benign_shift", 3.0, n=400, d=3, n_batches=3, batch_size=80)
    blob = json.dumps(report.to_dict(), sort_keys=True)
    assert BatchedStudyReport.from_dict(json.loads(blob)) == report


def test_study_alignment_guards():
    rng = np.random.default_rng(16)
    fm = FeatureMatrix(feature_names=["a"], rows=rng.normal(size=(50, 1)))
    ps_short = PredictionSet(p_positive=rng.uniform(size=49))
    ps = PredictionSet(p_positive=rng.uniform(size=50))
    with pytest.raises(SchemaError):
        run_batched_study(fm, ps_short, fm, ps, n_batches=2, batch_size=10)
    fm_wide = FeatureMatrix(feature_names=["a", "b"], rows=rng.normal(size=(50, 2)))
    with pytest.raises(DimensionMismatch):
        run_batched_study(fm, ps, fm_wide, ps, n_batches=2, batch_size=10)


def test_histogram_two_values_two_bins():
    fm = FeatureMatrix(feature_names=["v"], rows=np.array([[0.0], [0.0], [1.0], [1.0]]))
    summary = feature_histogram([("data", fm)], "v", bins=2)
    assert summary.counts_per_group["data"] == (2.0, 2.0)
    assert summary.bin_edges == (0.0, 0.5, 1.0)


def test_histogram_shared_edges_and_self_identity():
    rng = np.random.default_rng(17)
    a = FeatureMatrix(feature_names=["v"], rows=rng.normal(size=(100, 1)))
    b = FeatureMatrix(feature_names=["v"], rows=rng.normal(loc=3.0, size=(80, 1)))
    summary = feature_histogram([("a", a), ("b", b)], "v", bins=10)
    assert len(summary.bin_edges) == 11
    assert set(summary.counts_per_group) == {"a", "b"}
    assert sum(summary.counts_per_group["a"]) == 100.0
    assert sum(summary.counts_per_group["b"]) == 80.0
    same = feature_histogram([("x", a), ("y", a)], "v", bins=10)
    assert same.counts_per_group["x"] == same.counts_per_group["y"]


def test_histogram_label_split_groups():
    p = np.concatenate([np.full(50, 0.05), np.full(50, 0.95)])
    labels = np.array([0] * 50 + [1] * 50)
    ps = PredictionSet(p_positive=p, labels=labels)
    summary = feature_histogram(
        [("preds", ps)], "p_positive split by label", bins=10
    )
    assert set(summary.counts_per_group) == {
        "preds: true normal", "preds: true tumor",
    }
    normal = summary.counts_per_group["preds: true normal"]
    tumor = summary.counts_per_group["preds: true tumor"]
    assert normal[0] == 50.0 and sum(normal[1:]) == 0.0
    assert tumor[-1] == 50.0 and sum(tumor[:-1]) == 0.0


def test_histogram_p_positive_and_errors():
    rng = np.random.default_rng(18)
    ps = PredictionSet(p_positive=rng.uniform(size=40))
    fm = FeatureMatrix(feature_names=["a"], rows=rng.normal(size=(40, 1)))
    summary = feature_histogram([("p", ps)], "p_positive", bins=5)
    assert sum(summary.counts_per_group["p"]) == 40.0
    with pytest.raises(UnknownFeature):
        feature_histogram([("p", ps)], "a")
    with pytest.raises(UnknownFeature):
        feature_histogram([("f", fm)], "missing")
    with pytest.raises(UnknownFeature):
        feature_histogram([("f", fm)], "p_positive")
    with pytest.raises(MissingLabels):
        feature_histogram([("p", ps)], "p_positive split by label")


def test_histogram_degenerate_range_and_normalization():
    fm = FeatureMatrix(feature_names=["v"], rows=np.full((8, 1), 2.0))
    summary = feature_histogram([("flat", fm)], "v", bins=4, normalized=True)
    assert summary.bin_edges[0] == 1.5
    assert summary.bin_edges[-1] == 2.5
    assert sum(summary.counts_per_group["flat"]) == pytest.approx(1.0)
