"""Classifier two-sample tests and a reconstruction-error detector.

All detectors share one protocol: pool reference (domain 0) and target
(domain 1), make a seeded stratified train/test split, standardise with
statistics of the train split only, fit, then score the held-out half.

The logistic model trains by full-batch gradient descent from zero
initialisation.  The sigmoid is computed as 0.5 + 0.5*sign(z)*tanh(|z|/2)
and the AUC is taken over decision scores, so training with flipped
domain labels on the same split negates the whole weight trajectory
bit-exactly and the held-out AUC maps to its exact complement (AUC is
invariant under the strictly increasing sigmoid, so decision scores and
probabilities rank identically).

The random forest is sequential and seeded: tree t draws its bootstrap
and feature subsets from generator seed + t, so results do not depend on
worker or thread counts.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .cdi import midranks
from .core import split_indices
from .errors import DimensionMismatch, EmptySample, InvalidConfig, TooFewSamples


@dataclass(frozen=True)
class DetectorConfig:
    test_fraction: float = 0.5
    iterations: int = 500
    learning_rate: float = 0.1
    l2_lambda: float = 1e-3
    trees: int = 100
    max_depth: int = 8
    min_leaf: int = 5
    feature_subsample: str = "sqrt"  # "sqrt" | "all"
    variance_target: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfig(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.iterations < 1:
            raise InvalidConfig(f"iterations must be >= 1, got {self.iterations}")
        if not self.learning_rate > 0:
            raise InvalidConfig(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.l2_lambda < 0:
            raise InvalidConfig(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.trees < 1:
            raise InvalidConfig(f"trees must be >= 1, got {self.trees}")
        if self.max_depth < 1:
            raise InvalidConfig(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise InvalidConfig(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.feature_subsample not in ("sqrt", "all"):
            raise InvalidConfig(
                f"feature_subsample must be sqrt|all, got {self.feature_subsample!r}"
            )
        if not 0.0 < self.variance_target <= 1.0:
            raise InvalidConfig(
                f"variance_target must be in (0, 1], got {self.variance_target}"
            )


@dataclass(frozen=True)
class DetectorResult:
    detector_name: str
    score: float
    n_train: int
    n_test: int
    seed: int
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorResult":
        return cls(**d)


def _as_rows(x, name: str) -> np.ndarray:
    rows = getattr(x, "rows", x)
    arr = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if arr.shape[0] == 0:
        raise EmptySample(f"{name} sample is empty")
    return arr


def _paired_rows(ref, tgt):
    a = _as_rows(ref, "reference")
    b = _as_rows(tgt, "target")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"reference has {a.shape[1]} features, target has {b.shape[1]}"
        )
    return a, b


def _domain_split(ref: np.ndarray, tgt: np.ndarray, cfg: DetectorConfig):
    """Stratified train/test split of the pooled two-domain sample."""
    if ref.shape[0] < 4 or tgt.shape[0] < 4:
        raise TooFewSamples("classifier two-sample tests need >= 4 samples per side")
    rng = np.random.default_rng(cfg.seed)
    parts = {"train_x": [], "train_y": [], "test_x": [], "test_y": []}
    for domain, rows in ((0.0, ref), (1.0, tgt)):
        n = rows.shape[0]
        k = int(round(cfg.test_fraction * n))
        k = min(max(k, 1), n - 1)
        perm = rng.permutation(n)
        test_idx = np.sort(perm[:k])
        train_idx = np.sort(perm[k:])
        parts["train_x"].append(rows[train_idx])
        parts["train_y"].append(np.full(train_idx.size, domain))
        parts["test_x"].append(rows[test_idx])
        parts["test_y"].append(np.full(test_idx.size, domain))
    x_train = np.concatenate(parts["train_x"], axis=0)
    y_train = np.concatenate(parts["train_y"])
    x_test = np.concatenate(parts["test_x"], axis=0)
    y_test = np.concatenate(parts["test_y"])
    return x_train, y_train, x_test, y_test


def _standardize(train: np.ndarray, test: np.ndarray):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.maximum(sd, 1e-12)
    return (train - mu) / sd, (test - mu) / sd


def _fit_logistic(x: np.ndarray, y: np.ndarray, cfg: DetectorConfig):
    """Full-batch GD from zero init; residual written in odd-symmetric form."""
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    offset = 0.5 - y  # +-0.5 exactly
    for _ in range(cfg.iterations):
        z = x @ w + b
        half_tanh = 0.5 * (np.sign(z) * np.tanh(np.abs(z) * 0.5))
        resid = half_tanh + offset  # == sigmoid(z) - y
        gw = x.T @ resid / n + cfg.l2_lambda * w
        gb = resid.mean()
        w = w - cfg.learning_rate * gw
        b = b - cfg.learning_rate * gb
    return w, b


def _auc_scores(scores: np.ndarray, y: np.ndarray) -> float:
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TooFewSamples("held-out split lost one domain entirely")
    r = midranks(scores)
    a = float(np.sum(r[y == 1])) - n_pos * (n_pos + 1) / 2.0
    return a / (n_pos * n_neg)


def _logistic_protocol(ref, tgt, cfg: DetectorConfig):
    ref, tgt = _paired_rows(ref, tgt)
    x_train, y_train, x_test, y_test = _domain_split(ref, tgt, cfg)
    x_train, x_test = _standardize(x_train, x_test)
    w, b = _fit_logistic(x_train, y_train, cfg)
    scores = x_test @ w + b
    auc = _auc_scores(scores, y_test)
    accuracy = float(np.mean((scores > 0.0) == (y_test == 1.0)))
    return auc, accuracy, x_train.shape[0], x_test.shape[0]


def c2st_logistic(ref, tgt, config: DetectorConfig | None = None) -> DetectorResult:
    """Held-out AUC of a logistic domain classifier; 0.5 means no shift."""
    cfg = config or DetectorConfig()
    auc, accuracy, n_train, n_test = _logistic_protocol(ref, tgt, cfg)
    return DetectorResult(
        detector_name="c2st_logistic",
        score=auc,
        n_train=n_train,
        n_test=n_test,
        seed=cfg.seed,
        detail={"auc": auc, "accuracy": accuracy},
    )


def domain_classifier_accuracy(ref, tgt, config: DetectorConfig | None = None) -> DetectorResult:
    """Same trained model and split as c2st_logistic; score is accuracy at 0.5."""
    cfg = config or DetectorConfig()
    auc, accuracy, n_train, n_test = _logistic_protocol(ref, tgt, cfg)
    return DetectorResult(
        detector_name="domain_classifier",
        score=accuracy,
        n_train=n_train,
        n_test=n_test,
        seed=cfg.seed,
        detail={"auc": auc, "accuracy": accuracy},
    )


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, value=None, feature=None, threshold=None, left=None, right=None):
        self.value = value
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


def _best_split_on_feature(xf: np.ndarray, y: np.ndarray, min_leaf: int):
    """Minimum weighted Gini over thresholds between distinct sorted values."""
    order = np.argsort(xf, kind="stable")
    xs = xf[order]
    ys = y[order]
    n = xs.size
    cum_pos = np.cumsum(ys)
    total_pos = cum_pos[-1]
    i = np.arange(n - 1)
    valid = (xs[:-1] != xs[1:]) & (i + 1 >= min_leaf) & (n - (i + 1) >= min_leaf)
    if not valid.any():
        return None
    left_n = (i + 1)[valid].astype(np.float64)
    right_n = n - left_n
    left_pos = cum_pos[:-1][valid]
    right_pos = total_pos - left_pos
    pl = left_pos / left_n
    pr = right_pos / right_n
    gini = left_n * (2 * pl * (1 - pl)) + right_n * (2 * pr * (1 - pr))
    impurity = gini / n
    j = int(np.argmin(impurity))
    pos = np.flatnonzero(valid)[j]
    threshold = 0.5 * (xs[pos] + xs[pos + 1])
    return float(impurity[j]), float(threshold)


def _grow_tree(x, y, idx, depth, cfg: DetectorConfig, rng, n_feats):
    sub_y = y[idx]
    if (
        depth >= cfg.max_depth
        or idx.size < 2 * cfg.min_leaf
        or sub_y.min() == sub_y.max()
    ):
        return _TreeNode(value=float(sub_y.mean()))
    d = x.shape[1]
    feats = np.sort(rng.choice(d, size=n_feats, replace=False))
    best = None
    for f in feats:
        res = _best_split_on_feature(x[idx, f], sub_y, cfg.min_leaf)
        if res is None:
            continue
        impurity, threshold = res
        if best is None or impurity < best[0]:
            best = (impurity, int(f), threshold)
    if best is None:
        return _TreeNode(value=float(sub_y.mean()))
    _, feature, threshold = best
    mask = x[idx, feature] <= threshold
    left = _grow_tree(x, y, idx[mask], depth + 1, cfg, rng, n_feats)
    right = _grow_tree(x, y, idx[~mask], depth + 1, cfg, rng, n_feats)
    return _TreeNode(feature=feature, threshold=threshold, left=left, right=right)


def _tree_predict(node: _TreeNode, x: np.ndarray, idx: np.ndarray, out: np.ndarray):
    if node.value is not None:
        out[idx] = node.value
        return
    mask = x[idx, node.feature] <= node.threshold
    _tree_predict(node.left, x, idx[mask], out)
    _tree_predict(node.right, x, idx[~mask], out)


def c2st_random_forest(ref, tgt, config: DetectorConfig | None = None) -> DetectorResult:
    """Held-out AUC of a seeded random forest domain classifier.

    Tree t draws its bootstrap rows and per-node feature subsets from a
    generator seeded with seed + t; votes are the mean of per-tree leaf
    probabilities.
    """
    cfg = config or DetectorConfig()
    ref, tgt = _paired_rows(ref, tgt)
    x_train, y_train, x_test, y_test = _domain_split(ref, tgt, cfg)
    d = x_train.shape[1]
    if cfg.feature_subsample == "sqrt":
        n_feats = max(1, int(round(np.sqrt(d))))
    else:
        n_feats = d
    votes = np.zeros(x_test.shape[0])
    n = x_train.shape[0]
    for t in range(cfg.trees):
        rng = np.random.default_rng(cfg.seed + t)
        boot = rng.integers(0, n, size=n)
        root = _grow_tree(x_train[boot], y_train[boot], np.arange(n), 0, cfg, rng, n_feats)
        pred = np.empty(x_test.shape[0])
        _tree_predict(root, x_test, np.arange(x_test.shape[0]), pred)
        votes += pred
    votes /= cfg.trees
    auc = _auc_scores(votes, y_test)
    return DetectorResult(
        detector_name="c2st_random_forest",
        score=auc,
        n_train=int(n),
        n_test=int(x_test.shape[0]),
        seed=cfg.seed,
        detail={"auc": auc, "trees": cfg.trees},
    )


def autoencoder_score(ref, tgt, config: DetectorConfig | None = None) -> DetectorResult:
    """Reconstruction-error ratio of a linear principal-component model.

    The reference is split in half (seeded); components are fitted on the
    first half, keeping the smallest k whose explained-variance ratio
    reaches variance_target.  Score = MSE(target) / MSE(holdout half),
    denominator floored at 1e-12.  Near 1 means the target sits in the
    reference subspace.
    """
    cfg = config or DetectorConfig()
    ref, tgt = _paired_rows(ref, tgt)
    if ref.shape[0] < 4:
        raise TooFewSamples("autoencoder needs >= 4 reference rows")
    fit_idx, hold_idx = split_indices(ref.shape[0], 0.5, seed=cfg.seed)
    fit = ref[fit_idx]
    hold = ref[hold_idx]
    mu = fit.mean(axis=0)
    centered = fit - mu
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    power = svals**2
    total = float(power.sum())
    if total <= 0.0:
        basis = np.zeros((0, ref.shape[1]))
        k = 0
    else:
        ratios = np.cumsum(power) / total
        k = int(np.searchsorted(ratios, cfg.variance_target - 1e-15) + 1)
        k = min(k, vt.shape[0])
        basis = vt[:k]

    def mse(rows: np.ndarray) -> float:
        centered_rows = rows - mu
        recon = centered_rows @ basis.T @ basis
        err = centered_rows - recon
        return float(np.mean(err * err))

    mse_target = mse(tgt)
    mse_holdout = mse(hold)
    score = mse_target / max(mse_holdout, 1e-12)
    return DetectorResult(
        detector_name="autoencoder",
        score=score,
        n_train=int(fit.shape[0]),
        n_test=int(tgt.shape[0]),
        seed=cfg.seed,
        detail={"components": k, "mse_target": mse_target, "mse_holdout": mse_holdout},
    )
