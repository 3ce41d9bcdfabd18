import numpy as np
import pytest

from domainsat.baseline import build_baseline, normalize_score
from domainsat.core import BaselineProfile, FeatureMatrix, draw_indices, take
from domainsat.errors import InvalidConfig, UnknownMetric
from domainsat.registry import build_configs, run_scalar


def make_reference(n=300, d=3, seed=0, labeled=True):
    rng = np.random.default_rng(seed)
    return FeatureMatrix(
        feature_names=[f"f{j}" for j in range(d)],
        rows=rng.normal(size=(n, d)),
        labels=rng.integers(0, 2, size=n) if labeled else None,
    )


def test_profile_value_is_the_mean_of_batch_scores():
    ref = make_reference()
    bundle = build_configs(seed=9)
    profile = build_baseline(
        ref, ["wasserstein"], bundle, n_batches=6, batch_size=80, seed=9
    )
    scores = []
    for b in range(6):
        idx = draw_indices(
            ref.n, 80, labels=ref.labels, class_ratio=0.5,
            with_replacement=True, seed=9 + b,
        )
        scores.append(run_scalar("wasserstein", ref, take(ref, idx), bundle))
    assert profile.values["wasserstein"] == pytest.approx(np.mean(scores), abs=1e-15)
    assert profile.stratified is True
    assert profile.n_batches == 6


def test_constant_reference_floors_wasserstein_baseline():
    ref = FeatureMatrix(feature_names=["a", "b"], rows=np.ones((50, 2)))
    profile = build_baseline(ref, ["wasserstein"], n_batches=3, batch_size=10, seed=1)
    assert profile.values["wasserstein"] == BaselineProfile.FLOOR
    assert profile.stratified is False


def test_worked_fold_example():
    profile = BaselineProfile(
        values={"mmd": 5.0}, n_batches=20, batch_size=5000, seed=0
    )
    assert normalize_score(100.0, "mmd", profile) == 20.0


def test_fold_of_the_baseline_itself_is_exactly_one():
    ref = make_reference(n=200, d=2, seed=4)
    profile = build_baseline(ref, ["mmd", "wasserstein"], n_batches=4, batch_size=60, seed=4)
    for metric_id, value in profile.values.items():
        assert normalize_score(value, metric_id, profile) == 1.0


def test_fold_clamps_negative_and_zero_raw():
    profile = BaselineProfile(values={"mmd": 2.0}, n_batches=2, batch_size=5, seed=0)
    assert normalize_score(0.0, "mmd", profile) == 0.0
    assert normalize_score(-3.0, "mmd", profile) == 0.0


def test_fold_rejects_missing_metric():
    profile = BaselineProfile(values={"mmd": 2.0}, n_batches=2, batch_size=5, seed=0)
    with pytest.raises(UnknownMetric, match="mmd"):
        normalize_score(1.0, "wasserstein", profile)


def test_build_is_deterministic_and_order_invariant():
    ref = make_reference(n=240, d=2, seed=11)
    a = build_baseline(ref, ["mmd", "wasserstein"], n_batches=4, batch_size=50, seed=2)
    b = build_baseline(ref, ["wasserstein", "mmd"], n_batches=4, batch_size=50, seed=2)
    c = build_baseline(ref, ["mmd", "wasserstein"], n_batches=4, batch_size=50, seed=2)
    assert a.values == b.values == c.values


def test_detector_ids_are_foldable():
    ref = make_reference(n=120, d=2, seed=3)
    profile = build_baseline(
        ref, ["c2st_logistic"], n_batches=3, batch_size=40, seed=3
    )
    # batch vs full reference is a same-distribution comparison
    assert 0.3 <= profile.values["c2st_logistic"] <= 0.7


def test_rejects_empty_or_duplicate_metric_list():
    ref = make_reference(n=50, d=2)
    with pytest.raises(InvalidConfig):
        build_baseline(ref, [], n_batches=2, batch_size=10)
    with pytest.raises(InvalidConfig):
        build_baseline(ref, ["mmd", "mmd"], n_batches=2, batch_size=10)


def test_fresh_batches_have_fold_near_one():
    ref = make_reference(n=600, d=3, seed=21)
    bundle = build_configs(seed=21)
    profile = build_baseline(
        ref, ["wasserstein"], bundle, n_batches=10, batch_size=200, seed=21
    )
    folds = []
    for b in range(20):
        idx = draw_indices(
            ref.n, 200, labels=ref.labels, class_ratio=0.5,
            with_replacement=True, seed=5000 + b,
        )
        raw = run_scalar("wasserstein", ref, take(ref, idx), bundle)
        folds.append(normalize_score(raw, "wasserstein", profile))
    assert 0.5 <= float(np.mean(folds)) <= 2.0


def test_profile_round_trips_through_dict():
    ref = make_reference(n=100, d=2, seed=6)
    profile = build_baseline(ref, ["mmd"], n_batches=3, batch_size=30, seed=6)
    assert BaselineProfile.from_dict(profile.to_dict()) == profile
