"""In-distribution baseline and fold normalisation.

A raw shift score has no natural unit: how big is an MMD of 0.003?  The
baseline protocol answers by resampling the reference against itself:
draw n_batches batches with replacement from the reference (stratified
50:50 when labels exist), score each batch against the full reference,
and keep the mean per metric.  A target's fold score is then its raw
score divided by that mean, i.e. how many times larger the shift is
than ordinary within-reference sampling noise.
"""

from __future__ import annotations

import numpy as np

from .core import BaselineProfile, FeatureMatrix, draw_indices, take
from .errors import InvalidConfig, UnknownMetric
from .registry import ConfigBundle, build_configs, run_scalar


def build_baseline(
    ref: FeatureMatrix,
    metric_ids,
    bundle: ConfigBundle | None = None,
    n_batches: int = 20,
    batch_size: int = 5000,
    seed: int = 0,
) -> BaselineProfile:
    """Mean self-shift score per metric over seeded reference batches.

    Batch b uses seed + b, so profiles are reproducible and batches are
    distinct.  Any metric or detector id with a scalar score is allowed.
    """
    metric_ids = list(metric_ids)
    if not metric_ids:
        raise InvalidConfig("metric_ids must not be empty")
    if len(set(metric_ids)) != len(metric_ids):
        raise InvalidConfig("metric_ids contains duplicates")
    bundle = bundle or build_configs(seed=seed)
    stratified = ref.labels is not None
    sums = {metric_id: 0.0 for metric_id in metric_ids}
    for b in range(n_batches):
        idx = draw_indices(
            ref.n,
            batch_size,
            labels=ref.labels,
            class_ratio=0.5 if stratified else None,
            with_replacement=True,
            seed=seed + b,
        )
        batch = take(ref, idx)
        for metric_id in metric_ids:
            sums[metric_id] += run_scalar(metric_id, ref, batch, bundle)
    values = {metric_id: sums[metric_id] / n_batches for metric_id in metric_ids}
    return BaselineProfile(
        values=values,
        n_batches=n_batches,
        batch_size=batch_size,
        seed=seed,
        stratified=stratified,
    )


def normalize_score(raw: float, metric_id: str, profile: BaselineProfile) -> float:
    """fold = max(raw, 0) / baseline mean for the metric."""
    if metric_id not in profile.values:
        raise UnknownMetric(
            f"metric {metric_id!r} not in baseline profile; present: "
            + ", ".join(sorted(profile.values))
        )
    return max(float(raw), 0.0) / profile.values[metric_id]
