"""Confidence deviation indices and label-based AUC.

Model degradation under shift shows up in the *confidence profile* of a
frozen binary classifier before any labels arrive.  Two indices summarise
that profile for a set of positive-class probabilities p_i:

  margin index    CDI_M = 2 * mean(|p_i - boundary|)        (boundary 0.5)
  entropy index   CDI_H = 1 - mean(H(p_i)),   H in bits, 0*log2(0) := 0

Both are 1 when every prediction is fully confident and 0 when every
prediction sits on the boundary.  Delta variants subtract reference from
target, so negative deltas mean a confidence collapse on the target.

AUC is the rank-based pair-counting probability (ties count 1/2), which
equals brute-force pair counting exactly and is invariant under strictly
increasing score transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CdiReport, PredictionSet
from .errors import EmptyPredictions, InvalidConfig, MissingLabels, SingleClass


@dataclass(frozen=True)
class CdiConfig:
    """boundary: decision boundary for the margin index (0 < boundary < 1).

    log_base is fixed at 2 so the entropy index is in bits and bounded by 1.
    alarm_delta_margin: alarm when delta CDI_M falls below this (operational
    default -0.02; not a published constant).
    """

    boundary: float = 0.5
    log_base: int = 2
    alarm_delta_margin: float = -0.02

    def __post_init__(self):
        if not 0.0 < self.boundary < 1.0:
            raise InvalidConfig(f"boundary must be in (0, 1), got {self.boundary}")
        if self.log_base != 2:
            raise InvalidConfig("log_base is fixed at 2")


def _probs(preds: PredictionSet | np.ndarray) -> np.ndarray:
    p = preds.p_positive if isinstance(preds, PredictionSet) else np.asarray(preds, dtype=np.float64)
    if p.size == 0:
        raise EmptyPredictions("no predictions")
    return p


def cdi_margin(preds: PredictionSet | np.ndarray, boundary: float = 0.5) -> float:
    """Mean scaled distance of probabilities from the decision boundary."""
    p = _probs(preds)
    return float(2.0 * np.mean(np.abs(p - boundary)))


def binary_entropy(p: np.ndarray) -> np.ndarray:
    """Elementwise H(p) in bits with the 0*log2(0) := 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    interior = (p > 0.0) & (p < 1.0)
    q = p[interior]
    out[interior] = -q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q)
    return out


def cdi_entropy(preds: PredictionSet | np.ndarray) -> float:
    """One minus the mean binary entropy (bits) of the probabilities."""
    p = _probs(preds)
    return float(1.0 - np.mean(binary_entropy(p)))


def delta_cdi(target_value: float, reference_value: float) -> float:
    """Plain difference target - reference; delta(x, x) == 0 bit-exactly."""
    return float(target_value) - float(reference_value)


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged; exact half-integers."""
    values = np.asarray(values)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    # boundaries of tie runs in the sorted array
    boundary = np.empty(values.size, dtype=bool)
    boundary[0] = True
    boundary[1:] = sorted_vals[1:] != sorted_vals[:-1]
    group = np.cumsum(boundary) - 1
    starts = np.flatnonzero(boundary)
    counts = np.diff(np.append(starts, values.size))
    # midrank of a run starting at s (0-based) with c members: s + (c + 1) / 2
    run_rank = starts + (counts + 1) / 2.0
    ranks = np.empty(values.size, dtype=np.float64)
    ranks[order] = run_rank[group]
    return ranks


def auc(preds: PredictionSet) -> float:
    """P(score of a positive > score of a negative), ties counted 1/2."""
    if preds.labels is None:
        raise MissingLabels("AUC needs labels")
    p = _probs(preds)
    y = preds.labels
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass(f"AUC needs both classes, got {n_pos} positives / {n_neg} negatives")
    r = midranks(p)
    rank_sum_pos = float(np.sum(r[y == 1]))
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def delta_auc(target: PredictionSet, reference: PredictionSet) -> float:
    """AUC(target) - AUC(reference)."""
    return auc(target) - auc(reference)


def cdi_report(
    reference: PredictionSet,
    target: PredictionSet,
    config: CdiConfig | None = None,
) -> CdiReport:
    """All indices for a reference/target pair; AUC only when both carry labels."""
    cfg = config or CdiConfig()
    m_ref = cdi_margin(reference, cfg.boundary)
    m_tgt = cdi_margin(target, cfg.boundary)
    h_ref = cdi_entropy(reference)
    h_tgt = cdi_entropy(target)
    a_ref = a_tgt = d_auc = None
    if reference.labels is not None and target.labels is not None:
        a_ref = auc(reference)
        a_tgt = auc(target)
        d_auc = delta_cdi(a_tgt, a_ref)
    d_m = delta_cdi(m_tgt, m_ref)
    return CdiReport(
        cdi_m_ref=m_ref,
        cdi_m_target=m_tgt,
        delta_cdi_m=d_m,
        cdi_h_ref=h_ref,
        cdi_h_target=h_tgt,
        delta_cdi_h=delta_cdi(h_tgt, h_ref),
        boundary=cfg.boundary,
        auc_ref=a_ref,
        auc_target=a_tgt,
        delta_auc=d_auc,
        alarm=bool(d_m < cfg.alarm_delta_margin),
        alarm_threshold=cfg.alarm_delta_margin,
    )
