"""Frozen zero-shot classification head and synthetic shift scenarios.

The head mimics embedding-space zero-shot inference: L2-normalize the
input, take scaled cosine similarity against two stored class prototype
vectors (row 0 = tumor, row 1 = normal), and softmax the two logits.

The scenario generator builds matched datasets for three situations:

* ``id``: two Gaussian classes separated along axis 0, both offset by a
  fixed amount along axis 1 so the cluster does not sit at the origin.
  The head's prototypes are the normalized class means and its logit
  scale is solved so that a sample at a class mean lands near a target
  logit gap, which keeps posteriors informative but not saturated.
* ``benign_shift``: the identical draws translated along axis 1.  The
  translation is orthogonal to the class axis and to the prototype
  difference, so the decision direction is untouched; it only shrinks
  embedding norms (the cluster moves toward the origin), which slightly
  sharpens posteriors.  Large input shift, no performance loss.
* ``harmful_shift``: class means contracted toward each other along
  axis 0 by the shift magnitude (total), with the head left frozen.
  Samples crowd the decision boundary: confidence and AUC both fall.

All randomness comes from one generator seeded by the config, and the
kind only changes deterministic post-transforms, so shift_magnitude 0
reproduces the ``id`` draws bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMatrix, PredictionSet, _freeze
from .errors import DimensionMismatch, InvalidConfig, ZeroVector

NOISE_SIGMA = 1.0
BASE_OFFSET = 4.0
TARGET_LOGIT = 2.2

SCENARIO_KINDS = ("id", "benign_shift", "harmful_shift")


def l2_normalize(v) -> np.ndarray:
    """Return v / ||v||_2; raises ZeroVector on an exactly zero input."""
    arr = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ZeroVector("cannot normalize a zero vector")
    return arr / norm


@dataclass(frozen=True)
class ZeroShotHead:
    """Two L2-normalized class prototypes (row 0 tumor, row 1 normal)."""

    class_prototypes: np.ndarray
    logit_scale: float = 100.0

    def __post_init__(self):
        protos = np.atleast_2d(np.asarray(self.class_prototypes, dtype=np.float64))
        if protos.shape[0] != 2:
            raise InvalidConfig(f"expected 2 class prototypes, got {protos.shape[0]}")
        normalized = np.vstack([l2_normalize(row) for row in protos])
        object.__setattr__(self, "class_prototypes", _freeze(normalized))
        object.__setattr__(self, "logit_scale", float(self.logit_scale))
        if not self.logit_scale > 0:
            raise InvalidConfig(f"logit_scale must be > 0, got {self.logit_scale}")

    @property
    def d(self) -> int:
        return int(self.class_prototypes.shape[1])


def _posterior_matrix(rows: np.ndarray, head: ZeroShotHead) -> np.ndarray:
    """Row-wise (p_tumor, p_normal) via stable two-class softmax."""
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("cannot normalize a zero vector")
    unit = rows / norms[:, None]
    logits = head.logit_scale * (unit @ head.class_prototypes.T)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=1, keepdims=True)


def zero_shot_posteriors(embedding, head: ZeroShotHead) -> tuple[float, float]:
    """(p_tumor, p_normal) for one embedding; sums to 1."""
    vec = np.asarray(embedding, dtype=np.float64).reshape(-1)
    if vec.size != head.d:
        raise DimensionMismatch(
            f"embedding has dimension {vec.size}, prototypes have {head.d}"
        )
    post = _posterior_matrix(vec[None, :], head)[0]
    return float(post[0]), float(post[1])


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    n: int = 4000
    d: int = 16
    class_separation: float = 3.0
    shift_magnitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise InvalidConfig(
                f"kind must be one of {', '.join(SCENARIO_KINDS)}, got {self.kind!r}"
            )
        if self.n < 2 or self.n % 2 != 0:
            raise InvalidConfig(f"n must be an even count >= 2, got {self.n}")
        if self.d < 2:
            raise InvalidConfig(f"d must be >= 2, got {self.d}")
        if not self.class_separation > 0:
            raise InvalidConfig(
                f"class_separation must be > 0, got {self.class_separation}"
            )
        if self.shift_magnitude < 0:
            raise InvalidConfig(
                f"shift_magnitude must be >= 0, got {self.shift_magnitude}"
            )
        if self.kind == "harmful_shift" and self.shift_magnitude > self.class_separation:
            raise InvalidConfig(
                "harmful shift_magnitude cannot exceed class_separation "
                f"({self.shift_magnitude} > {self.class_separation})"
            )


def _base_centers(cfg: ScenarioConfig) -> np.ndarray:
    """Class means before any shift; row 0 = normal, row 1 = tumor."""
    centers = np.zeros((2, cfg.d))
    centers[0, 0] = -cfg.class_separation / 2.0
    centers[1, 0] = cfg.class_separation / 2.0
    centers[:, 1] = -BASE_OFFSET
    return centers


def _solve_logit_scale(cfg: ScenarioConfig) -> float:
    """Scale putting the logit gap at a class mean near TARGET_LOGIT."""
    half_sep = cfg.class_separation / 2.0
    mean_norm = float(np.hypot(half_sep, BASE_OFFSET))
    typical_norm = float(np.sqrt(mean_norm**2 + cfg.d * NOISE_SIGMA**2))
    return TARGET_LOGIT * mean_norm * typical_norm / (cfg.class_separation * half_sep)


def generate_scenario(config: ScenarioConfig):
    """Build (features, predictions, head) for one scenario.

    Labels are 0 = normal, 1 = tumor, half of each; the head is always
    fitted to the unshifted class means (a frozen model), and predictions
    are its posteriors on the generated rows.
    """
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    half = cfg.n // 2
    labels = np.array([0] * half + [1] * half, dtype=np.int64)
    noise = rng.normal(0.0, NOISE_SIGMA, size=(cfg.n, cfg.d))

    base = _base_centers(cfg)
    head = ZeroShotHead(
        class_prototypes=np.vstack([base[1], base[0]]),
        logit_scale=_solve_logit_scale(cfg),
    )

    centers = base.copy()
    if cfg.kind == "benign_shift":
        centers[:, 1] += cfg.shift_magnitude
    elif cfg.kind == "harmful_shift":
        centers[0, 0] += cfg.shift_magnitude / 2.0
        centers[1, 0] -= cfg.shift_magnitude / 2.0

    rows = centers[labels] + noise
    sample_ids = ["s%06d" % i for i in range(cfg.n)]
    features = FeatureMatrix(
        feature_names=[f"f{j}" for j in range(cfg.d)],
        rows=rows,
        sample_ids=sample_ids,
        labels=labels,
    )
    p_tumor = _posterior_matrix(rows, head)[:, 0]
    predictions = PredictionSet(
        p_positive=p_tumor,
        sample_ids=sample_ids,
        labels=labels,
    )
    return features, predictions, head
