"""Distribution-distance metrics between a reference and a target sample.

All functions take plain (n, d) float arrays (one row per sample) and are
deterministic for a fixed MetricConfig.  Per-feature variants return one
value per column; the *_mean forms average them.

Divergences (KL/JS) are histogram-based with quantile bins anchored to the
reference marginal, plus open-ended underflow/overflow bins so no target
mass is ever dropped.  Both are reported in bits (base 2).  Because the
binning follows the reference, swapping ref and tgt changes the bins, so
end-to-end JS is only approximately symmetric; the divergence itself is
exactly symmetric for a fixed binning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    EmptySample,
    InvalidConfig,
    SingularCovariance,
    TooFewSamples,
)

_CHUNK = 512


@dataclass(frozen=True)
class MetricConfig:
    """kernel_bandwidth None means the median heuristic decides per call."""

    kernel_bandwidth: float | None = None
    histogram_bins: int = 32
    smoothing_epsilon: float = 1e-6
    shrinkage: float = 0.01
    max_pairs: int = 250_000
    seed: int = 0

    def __post_init__(self):
        if self.kernel_bandwidth is not None and not self.kernel_bandwidth > 0:
            raise InvalidConfig(f"kernel_bandwidth must be > 0, got {self.kernel_bandwidth}")
        if self.histogram_bins < 2:
            raise InvalidConfig(f"histogram_bins must be >= 2, got {self.histogram_bins}")
        if not self.smoothing_epsilon > 0:
            raise InvalidConfig(f"smoothing_epsilon must be > 0, got {self.smoothing_epsilon}")
        if not 0.0 <= self.shrinkage < 1.0:
            raise InvalidConfig(f"shrinkage must be in [0, 1), got {self.shrinkage}")
        if self.max_pairs < 1:
            raise InvalidConfig(f"max_pairs must be >= 1, got {self.max_pairs}")


def _check_pair(ref: np.ndarray, tgt: np.ndarray, min_per_side: int = 1) -> tuple[np.ndarray, np.ndarray]:
    ref = np.atleast_2d(np.asarray(ref, dtype=np.float64))
    tgt = np.atleast_2d(np.asarray(tgt, dtype=np.float64))
    if ref.shape[0] == 0 or tgt.shape[0] == 0:
        raise EmptySample("both samples must be non-empty")
    if ref.shape[1] != tgt.shape[1]:
        raise DimensionMismatch(
            f"reference has {ref.shape[1]} features, target has {tgt.shape[1]}"
        )
    if ref.shape[0] < min_per_side or tgt.shape[0] < min_per_side:
        raise TooFewSamples(f"need at least {min_per_side} samples per side")
    return ref, tgt


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(sq, 0.0)


def median_heuristic_bandwidth(
    ref: np.ndarray, tgt: np.ndarray, max_pairs: int = 250_000, seed: int = 0
) -> float:
    """Median pairwise Euclidean distance over the pooled sample.

    Enumerates all pairs when there are at most max_pairs of them,
    otherwise draws max_pairs pairs with a seeded generator.  Falls back
    to 1.0 when the median is not strictly positive.
    """
    ref, tgt = _check_pair(ref, tgt)
    pooled = np.concatenate([ref, tgt], axis=0)
    n = pooled.shape[0]
    total_pairs = n * (n - 1) // 2
    if total_pairs < 1:
        return 1.0
    if total_pairs <= max_pairs:
        dists = []
        for i0 in range(0, n, _CHUNK):
            blk = pooled[i0 : i0 + _CHUNK]
            sq = _sq_dists(blk, pooled)
            for r in range(blk.shape[0]):
                dists.append(np.sqrt(sq[r, i0 + r + 1 :]))
        d = np.concatenate(dists)
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n, size=max_pairs)
        clash = i == j
        while clash.any():
            j[clash] = rng.integers(0, n, size=int(clash.sum()))
            clash = i == j
        diff = pooled[i] - pooled[j]
        d = np.sqrt((diff * diff).sum(axis=1))
    med = float(np.median(d))
    return med if med > 0.0 else 1.0


def _kernel_sum(a: np.ndarray, b: np.ndarray, sigma: float, skip_diagonal: bool) -> float:
    """Sum of exp(-||x - y||^2 / (2 sigma^2)) over all (row of a, row of b).

    Accumulated in fixed chunk order so the result is deterministic.
    """
    denom = 2.0 * sigma * sigma
    total = 0.0
    for i0 in range(0, a.shape[0], _CHUNK):
        blk = a[i0 : i0 + _CHUNK]
        k = np.exp(-_sq_dists(blk, b) / denom)
        if skip_diagonal:
            rows = np.arange(blk.shape[0])
            k[rows, i0 + rows] = 0.0
        total += float(k.sum())
    return total


def mmd_squared(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> float:
    """Unbiased squared maximum mean discrepancy with an RBF kernel.

    The U-statistic can dip below zero on near-identical samples; the
    value is clamped at 0.
    """
    cfg = config or MetricConfig()
    ref, tgt = _check_pair(ref, tgt, min_per_side=2)
    sigma = cfg.kernel_bandwidth
    if sigma is None:
        sigma = median_heuristic_bandwidth(ref, tgt, cfg.max_pairs, cfg.seed)
    m, n = ref.shape[0], tgt.shape[0]
    xx = _kernel_sum(ref, ref, sigma, skip_diagonal=True) / (m * (m - 1))
    yy = _kernel_sum(tgt, tgt, sigma, skip_diagonal=True) / (n * (n - 1))
    xy = _kernel_sum(ref, tgt, sigma, skip_diagonal=False) / (m * n)
    return max(xx + yy - 2.0 * xy, 0.0)


def _w1_1d(x: np.ndarray, y: np.ndarray) -> float:
    xs = np.sort(x)
    ys = np.sort(y)
    z = np.sort(np.concatenate([xs, ys]))
    dz = np.diff(z)
    if dz.size == 0:
        return 0.0
    fx = np.searchsorted(xs, z[:-1], side="right") / xs.size
    fy = np.searchsorted(ys, z[:-1], side="right") / ys.size
    return float(np.sum(np.abs(fx - fy) * dz))


def wasserstein_per_feature(ref: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    """1-D earth mover distance of each feature marginal (ECDF integral)."""
    ref, tgt = _check_pair(ref, tgt)
    return np.array([_w1_1d(ref[:, j], tgt[:, j]) for j in range(ref.shape[1])])


def wasserstein_mean(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> float:
    """Mean over features of the per-feature earth mover distance."""
    return float(np.mean(wasserstein_per_feature(ref, tgt)))


def mahalanobis_mean(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> float:
    """Mean Mahalanobis distance of target rows under the reference Gaussian fit.

    The covariance is shrunk toward its scaled identity:
    (1 - s) * Cov + s * mean(diag(Cov)) * I.  With shrinkage 0 a singular
    covariance raises SingularCovariance.
    """
    cfg = config or MetricConfig()
    ref, tgt = _check_pair(ref, tgt)
    if ref.shape[0] < 2:
        raise TooFewSamples("covariance fit needs at least 2 reference rows")
    mu = ref.mean(axis=0)
    cov = np.atleast_2d(np.cov(ref, rowvar=False, ddof=1))
    lam = cfg.shrinkage
    if lam > 0.0:
        d = cov.shape[0]
        cov = (1.0 - lam) * cov + lam * (np.trace(cov) / d) * np.eye(d)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularCovariance(
            "reference covariance is singular; use shrinkage > 0"
        ) from None
    diffs = tgt - mu
    ysol = solve_triangular(chol, diffs.T, lower=True)
    quad = np.maximum((ysol * ysol).sum(axis=0), 0.0)
    return float(np.mean(np.sqrt(quad)))


def _reference_bin_masses(
    ref_col: np.ndarray, tgt_col: np.ndarray, bins: int, eps: float
) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed per-bin masses over reference quantile bins plus open end bins."""
    edges = np.unique(np.quantile(ref_col, np.linspace(0.0, 1.0, bins + 1)))

    def histogram(v: np.ndarray) -> np.ndarray:
        if edges.size == 1:
            e = edges[0]
            return np.array(
                [np.sum(v < e), np.sum(v == e), np.sum(v > e)], dtype=np.float64
            )
        idx = np.searchsorted(edges, v, side="right")
        idx[v == edges[-1]] = edges.size - 1
        return np.bincount(idx, minlength=edges.size + 1).astype(np.float64)

    cr = histogram(ref_col)
    ct = histogram(tgt_col)
    pr = cr / cr.sum()
    pt = ct / ct.sum()
    b = pr.size
    pr = (pr + eps) / (1.0 + b * eps)
    pt = (pt + eps) / (1.0 + b * eps)
    return pr, pt


def _kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log2(p / q)))


def kl_per_feature(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> np.ndarray:
    """Per-feature KL(ref || tgt) in bits over reference-anchored bins."""
    cfg = config or MetricConfig()
    ref, tgt = _check_pair(ref, tgt)
    out = np.empty(ref.shape[1])
    for j in range(ref.shape[1]):
        pr, pt = _reference_bin_masses(ref[:, j], tgt[:, j], cfg.histogram_bins, cfg.smoothing_epsilon)
        out[j] = _kl_bits(pr, pt)
    return out


def js_per_feature(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> np.ndarray:
    """Per-feature Jensen-Shannon divergence in bits; each value is in [0, 1]."""
    cfg = config or MetricConfig()
    ref, tgt = _check_pair(ref, tgt)
    out = np.empty(ref.shape[1])
    for j in range(ref.shape[1]):
        pr, pt = _reference_bin_masses(ref[:, j], tgt[:, j], cfg.histogram_bins, cfg.smoothing_epsilon)
        mid = 0.5 * (pr + pt)
        out[j] = 0.5 * _kl_bits(pr, mid) + 0.5 * _kl_bits(pt, mid)
    return out


def kl_histogram(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> float:
    """Mean per-feature KL(ref || tgt); asymmetric by construction."""
    return float(np.mean(kl_per_feature(ref, tgt, config)))


def js_histogram(ref: np.ndarray, tgt: np.ndarray, config: MetricConfig | None = None) -> float:
    """Mean per-feature Jensen-Shannon divergence (bits)."""
    return float(np.mean(js_per_feature(ref, tgt, config)))
