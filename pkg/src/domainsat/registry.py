"""Catalog of every selectable algorithm and the dispatch glue.

One id string names each distance metric, hypothesis test, ML detector,
and confidence indicator.  The catalog carries a parameter schema per
algorithm so clients (CLI flags, HTTP payloads, generated UI forms) can
validate and echo configuration without hardcoding per-algorithm
knowledge.  Parameter names are globally unique, so one flat params
mapping configures everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ml_detectors, shift_metrics, stat_tests
from .cdi import CdiConfig
from .errors import InvalidConfig, UnknownMetric
from .ml_detectors import DetectorConfig, DetectorResult
from .shift_metrics import MetricConfig
from .stat_tests import TestConfig, per_feature_suite

METRIC_IDS = ("mmd", "wasserstein", "mahalanobis", "kl_divergence", "js_divergence")
TEST_IDS = ("ks", "rank_sum", "cvm", "chi2")
DETECTOR_IDS = ("domain_classifier", "c2st_logistic", "c2st_random_forest", "autoencoder")
CDI_IDS = ("cdi_margin", "cdi_entropy")

DEFAULT_DETECT_ALGOS = ("mmd", "wasserstein", "mahalanobis", "js_divergence", "kl_divergence", "ks")
DEFAULT_STUDY_METRICS = ("mmd", "wasserstein", "mahalanobis")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # number | integer | string
    default: object
    description: str
    minimum: float | None = None
    maximum: float | None = None
    choices: tuple[str, ...] | None = None
    nullable: bool = False

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "type": self.type,
            "default": self.default,
            "description": self.description,
        }
        if self.minimum is not None:
            out["minimum"] = self.minimum
        if self.maximum is not None:
            out["maximum"] = self.maximum
        if self.choices is not None:
            out["choices"] = list(self.choices)
        if self.nullable:
            out["nullable"] = True
        return out


@dataclass(frozen=True)
class AlgorithmSpec:
    algorithm_id: str
    category: str  # distance | statistic | ml | output
    summary: str
    params: tuple[ParamSpec, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "id": self.algorithm_id,
            "category": self.category,
            "summary": self.summary,
            "params": [p.to_dict() for p in self.params],
        }


_P = {
    "kernel_bandwidth": ParamSpec(
        "kernel_bandwidth", "number", None,
        "RBF kernel width; null selects the median pairwise distance",
        minimum=0.0, nullable=True,
    ),
    "max_pairs": ParamSpec(
        "max_pairs", "integer", 250_000,
        "pair budget for the median bandwidth heuristic", minimum=1,
    ),
    "shrinkage": ParamSpec(
        "shrinkage", "number", 0.01,
        "covariance shrinkage toward scaled identity", minimum=0.0, maximum=1.0,
    ),
    "histogram_bins": ParamSpec(
        "histogram_bins", "integer", 32,
        "reference-quantile bins for the divergence histograms", minimum=2,
    ),
    "smoothing_epsilon": ParamSpec(
        "smoothing_epsilon", "number", 1e-6,
        "additive mass that keeps empty bins off log(0)", minimum=0.0,
    ),
    "alpha": ParamSpec(
        "alpha", "number", 0.05,
        "family-wise alarm level after correction", minimum=0.0, maximum=1.0,
    ),
    "correction": ParamSpec(
        "correction", "string", "bonferroni",
        "multiple-testing correction across features",
        choices=("bonferroni", "none"),
    ),
    "cvm_permutations": ParamSpec(
        "cvm_permutations", "integer", 999,
        "permutation count for the Cramer-von Mises p-value", minimum=99,
    ),
    "chi2_bins": ParamSpec(
        "chi2_bins", "integer", 10,
        "quantile bins for the chi-squared table", minimum=2,
    ),
    "rank_exact_limit": ParamSpec(
        "rank_exact_limit", "integer", 8,
        "pooled size up to which the rank test enumerates exactly", minimum=0,
    ),
    "test_fraction": ParamSpec(
        "test_fraction", "number", 0.5,
        "held-out share of the pooled two-domain sample", minimum=0.0, maximum=1.0,
    ),
    "iterations": ParamSpec(
        "iterations", "integer", 500,
        "gradient descent steps for the logistic classifier", minimum=1,
    ),
    "learning_rate": ParamSpec(
        "learning_rate", "number", 0.1,
        "gradient descent step size", minimum=0.0,
    ),
    "l2_lambda": ParamSpec(
        "l2_lambda", "number", 1e-3,
        "L2 penalty on logistic weights", minimum=0.0,
    ),
    "trees": ParamSpec("trees", "integer", 100, "forest size", minimum=1),
    "max_depth": ParamSpec("max_depth", "integer", 8, "tree depth limit", minimum=1),
    "min_leaf": ParamSpec(
        "min_leaf", "integer", 5, "minimum samples per leaf", minimum=1,
    ),
    "feature_subsample": ParamSpec(
        "feature_subsample", "string", "sqrt",
        "features considered per split", choices=("sqrt", "all"),
    ),
    "variance_target": ParamSpec(
        "variance_target", "number", 0.95,
        "explained-variance ratio the principal components must reach",
        minimum=0.0, maximum=1.0,
    ),
    "boundary": ParamSpec(
        "boundary", "number", 0.5,
        "decision boundary the margin index measures distance from",
        minimum=0.0, maximum=1.0,
    ),
    "alarm_delta_margin": ParamSpec(
        "alarm_delta_margin", "number", -0.02,
        "margin-index drop below which the confidence alarm fires",
    ),
}


def _spec(algo_id, category, summary, param_names):
    return AlgorithmSpec(
        algorithm_id=algo_id,
        category=category,
        summary=summary,
        params=tuple(_P[name] for name in param_names),
    )


CATALOG: tuple[AlgorithmSpec, ...] = (
    _spec("mmd", "distance", "unbiased squared maximum mean discrepancy, RBF kernel",
          ("kernel_bandwidth", "max_pairs")),
    _spec("wasserstein", "distance", "mean per-feature earth mover distance", ()),
    _spec("mahalanobis", "distance",
          "mean Mahalanobis distance of target rows under the reference fit",
          ("shrinkage",)),
    _spec("kl_divergence", "distance",
          "KL divergence over reference-quantile histograms (bits)",
          ("histogram_bins", "smoothing_epsilon")),
    _spec("js_divergence", "distance",
          "Jensen-Shannon divergence over reference-quantile histograms (bits)",
          ("histogram_bins", "smoothing_epsilon")),
    _spec("ks", "statistic", "per-feature Kolmogorov-Smirnov test",
          ("alpha", "correction")),
    _spec("rank_sum", "statistic", "per-feature Wilcoxon rank-sum test",
          ("alpha", "correction", "rank_exact_limit")),
    _spec("cvm", "statistic", "per-feature Cramer-von Mises permutation test",
          ("alpha", "correction", "cvm_permutations")),
    _spec("chi2", "statistic", "per-feature chi-squared test on quantile bins",
          ("alpha", "correction", "chi2_bins")),
    _spec("domain_classifier", "ml", "held-out accuracy of a logistic domain classifier",
          ("test_fraction", "iterations", "learning_rate", "l2_lambda")),
    _spec("c2st_logistic", "ml", "held-out AUC of a logistic domain classifier",
          ("test_fraction", "iterations", "learning_rate", "l2_lambda")),
    _spec("c2st_random_forest", "ml", "held-out AUC of a random forest domain classifier",
          ("test_fraction", "trees", "max_depth", "min_leaf", "feature_subsample")),
    _spec("autoencoder", "ml", "principal-component reconstruction error ratio",
          ("variance_target",)),
    _spec("cdi_margin", "output", "confidence margin index 2*mean|p - boundary|",
          ("boundary", "alarm_delta_margin")),
    _spec("cdi_entropy", "output", "confidence entropy index 1 - mean binary entropy",
          ()),
)

_BY_ID = {spec.algorithm_id: spec for spec in CATALOG}

_METRIC_FN = {
    "mmd": shift_metrics.mmd_squared,
    "wasserstein": shift_metrics.wasserstein_mean,
    "mahalanobis": shift_metrics.mahalanobis_mean,
    "kl_divergence": shift_metrics.kl_histogram,
    "js_divergence": shift_metrics.js_histogram,
}

_DETECTOR_FN = {
    "domain_classifier": ml_detectors.domain_classifier_accuracy,
    "c2st_logistic": ml_detectors.c2st_logistic,
    "c2st_random_forest": ml_detectors.c2st_random_forest,
    "autoencoder": ml_detectors.autoencoder_score,
}

_METRIC_PARAMS = ("kernel_bandwidth", "histogram_bins", "smoothing_epsilon",
                  "shrinkage", "max_pairs")
_TEST_PARAMS = ("alpha", "correction", "cvm_permutations", "chi2_bins",
                "rank_exact_limit")
_DETECTOR_PARAMS = ("test_fraction", "iterations", "learning_rate", "l2_lambda",
                    "trees", "max_depth", "min_leaf", "feature_subsample",
                    "variance_target")
_CDI_PARAMS = ("boundary", "alarm_delta_margin")


@dataclass(frozen=True)
class ConfigBundle:
    metric: MetricConfig
    test: TestConfig
    detector: DetectorConfig
    cdi: CdiConfig
    params: dict = field(default_factory=dict)
    seed: int = 0


def algorithm_spec(algorithm_id: str) -> AlgorithmSpec:
    try:
        return _BY_ID[algorithm_id]
    except KeyError:
        raise UnknownMetric(
            f"unknown algorithm {algorithm_id!r}; valid ids: "
            + ", ".join(sorted(_BY_ID))
        ) from None


def catalog_dicts() -> list[dict]:
    return [spec.to_dict() for spec in CATALOG]


def build_configs(params: dict | None = None, seed: int = 0) -> ConfigBundle:
    """Route one flat params mapping into the four typed configs.

    Unknown parameter names raise InvalidConfig; value validation is
    delegated to each config's own constructor.
    """
    params = dict(params or {})
    for key in params:
        if key not in _P:
            raise InvalidConfig(
                f"unknown parameter {key!r}; valid names: " + ", ".join(sorted(_P))
            )

    def pick(names):
        return {k: params[k] for k in names if k in params}

    return ConfigBundle(
        metric=MetricConfig(seed=seed, **pick(_METRIC_PARAMS)),
        test=TestConfig(seed=seed, **pick(_TEST_PARAMS)),
        detector=DetectorConfig(seed=seed, **pick(_DETECTOR_PARAMS)),
        cdi=CdiConfig(**pick(_CDI_PARAMS)),
        params=params,
        seed=seed,
    )


def _rows(x) -> np.ndarray:
    return np.asarray(getattr(x, "rows", x), dtype=np.float64)


def run_metric(metric_id: str, ref, tgt, config: MetricConfig | None = None) -> float:
    try:
        fn = _METRIC_FN[metric_id]
    except KeyError:
        raise UnknownMetric(
            f"unknown metric {metric_id!r}; valid ids: " + ", ".join(sorted(_METRIC_FN))
        ) from None
    return float(fn(_rows(ref), _rows(tgt), config))


def run_test(test_id: str, ref, tgt, config: TestConfig | None = None):
    if test_id not in TEST_IDS:
        raise UnknownMetric(
            f"unknown test {test_id!r}; valid ids: " + ", ".join(sorted(TEST_IDS))
        )
    return per_feature_suite(ref, tgt, test_id, config)


def run_detector(detector_id: str, ref, tgt, config: DetectorConfig | None = None) -> DetectorResult:
    try:
        fn = _DETECTOR_FN[detector_id]
    except KeyError:
        raise UnknownMetric(
            f"unknown detector {detector_id!r}; valid ids: "
            + ", ".join(sorted(_DETECTOR_FN))
        ) from None
    return fn(ref, tgt, config)


def run_scalar(algorithm_id: str, ref, tgt, bundle: ConfigBundle) -> float:
    """Scalar score for any metric or detector id (the foldable ones)."""
    if algorithm_id in _METRIC_FN:
        return run_metric(algorithm_id, ref, tgt, bundle.metric)
    if algorithm_id in _DETECTOR_FN:
        return float(run_detector(algorithm_id, ref, tgt, bundle.detector).score)
    raise UnknownMetric(
        f"{algorithm_id!r} has no scalar score; valid ids: "
        + ", ".join(sorted((*_METRIC_FN, *_DETECTOR_FN)))
    )
