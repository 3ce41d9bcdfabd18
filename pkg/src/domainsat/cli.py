"""Command-line front door for every pipeline capability.

Exit codes are stable and machine-readable: 0 means success with no
alarm, 2 means the analysis raised an alarm (failing hypothesis test or
confidence drop past the threshold), and 1 means any error, including
bad usage.  Shell pipelines can therefore gate on the exit code without
parsing the report.

Reports are written as canonical JSON by default; ``--format csv``
flattens them for spreadsheets.  All commands accept ``--seed`` and are
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
import os
import socket
import sys

import click

from .baseline import build_baseline
from .cdi import cdi_report
from .errors import InvalidConfig, ToolboxError
from .ingest import (
    load_baseline,
    load_features_csv,
    load_predictions_csv,
    save_baseline,
    write_features_csv,
    write_histogram,
    write_predictions_csv,
    write_report,
)
from .model_head import ScenarioConfig, generate_scenario
from .pipeline import feature_histogram, run_batched_study, run_shift_analysis
from .registry import (
    DEFAULT_DETECT_ALGOS,
    DEFAULT_STUDY_METRICS,
    DETECTOR_IDS,
    METRIC_IDS,
    TEST_IDS,
    build_configs,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ALARM = 2


def _parse_params(config_json: str | None, **overrides) -> dict:
    """Merge the --config JSON object with explicit convenience flags."""
    params: dict = {}
    if config_json:
        text = config_json
        if config_json.startswith("@"):
            try:
                with open(config_json[1:], "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InvalidConfig(f"cannot read --config file: {exc}") from None
        try:
            params = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"--config is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise InvalidConfig("--config must be a JSON object")
    for key, value in overrides.items():
        if value is not None:
            params[key] = value
    return params


def _split_ids(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _route_default_algos() -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    metrics = tuple(a for a in DEFAULT_DETECT_ALGOS if a in METRIC_IDS)
    tests = tuple(a for a in DEFAULT_DETECT_ALGOS if a in TEST_IDS)
    detectors = tuple(a for a in DEFAULT_DETECT_ALGOS if a in DETECTOR_IDS)
    return metrics, tests, detectors


def common_options(fn):
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Random seed; identical seeds give identical reports.")(fn)
    fn = click.option("--config", "config_json", default=None, metavar="JSON",
                      help="JSON object of algorithm parameters (or @file).")(fn)
    return fn


def format_option(fn):
    return click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                        default="json", show_default=True,
                        help="Report file format.")(fn)


@click.group()
@click.version_option(package_name="domainsat")
def cli():
    """Domain shift analysis toolbox.

    Detects distribution shift between a reference and a target dataset
    and monitors classifier reliability through confidence deviation
    indices, without needing target labels.
    """


@cli.command()
@click.option("--reference", required=True, type=click.Path(exists=False),
              help="Reference (in-distribution) feature CSV.")
@click.option("--target", required=True, type=click.Path(exists=False),
              help="Target feature CSV to compare against the reference.")
@click.option("--metrics", default=None, metavar="IDS",
              help="Comma-separated distance metric ids.")
@click.option("--tests", default=None, metavar="IDS",
              help="Comma-separated hypothesis test ids.")
@click.option("--detectors", default=None, metavar="IDS",
              help="Comma-separated ML detector ids.")
@click.option("--alpha", type=float, default=None,
              help="Significance level for hypothesis tests.")
@click.option("--baseline", "baseline_path", default=None, type=click.Path(),
              help="Baseline profile JSON; adds fold scores to metrics.")
@click.option("--out", default="report.json", show_default=True, type=click.Path(),
              help="Report file to write.")
@format_option
@common_options
@click.pass_context
def detect(ctx, reference, target, metrics, tests, detectors, alpha,
           baseline_path, out, fmt, config_json, seed):
    """Run selected shift algorithms on one reference/target pair.

    With no algorithm flags a default panel runs: the five distance
    metrics plus the Kolmogorov-Smirnov test.  Exits 2 when any test
    alarms.
    """
    params = _parse_params(config_json, alpha=alpha)
    bundle = build_configs(params, seed=seed)
    ref = load_features_csv(reference)
    tgt = load_features_csv(target)
    if metrics is None and tests is None and detectors is None:
        metric_ids, test_ids, detector_ids = _route_default_algos()
    else:
        metric_ids = _split_ids(metrics)
        test_ids = _split_ids(tests)
        detector_ids = _split_ids(detectors)
    profile = load_baseline(baseline_path) if baseline_path else None
    report = run_shift_analysis(
        ref, tgt,
        metric_ids=metric_ids,
        test_ids=test_ids,
        detector_ids=detector_ids,
        bundle=bundle,
        profile=profile,
        seed=seed,
    )
    write_report(report, out, format=fmt)
    click.echo(f"wrote {out}", err=True)
    if report.errors:
        for name, message in report.errors.items():
            click.echo(f"{name} failed: {message}", err=True)
    if report.alarm:
        click.echo("alarm: at least one test rejected", err=True)
        ctx.exit(EXIT_ALARM)


@cli.command()
@click.option("--reference", required=True, type=click.Path(),
              help="Reference (in-distribution) feature CSV.")
@click.option("--metrics", default=",".join(DEFAULT_STUDY_METRICS),
              show_default=True, metavar="IDS",
              help="Comma-separated metric/detector ids to profile.")
@click.option("--batches", type=int, default=20, show_default=True,
              help="Number of in-distribution batches to sample.")
@click.option("--batch-size", type=int, default=5000, show_default=True,
              help="Samples per batch (drawn with replacement).")
@click.option("--out", default="baseline.json", show_default=True, type=click.Path(),
              help="Baseline profile file to write.")
@common_options
def baseline(reference, metrics, batches, batch_size, out, config_json, seed):
    """Build an in-distribution baseline profile for fold normalization.

    Samples batches from the reference against itself and stores the
    mean score per metric; `detect --baseline` and `study` divide raw
    scores by these values.
    """
    params = _parse_params(config_json)
    bundle = build_configs(params, seed=seed)
    ref = load_features_csv(reference)
    profile = build_baseline(
        ref, _split_ids(metrics), bundle,
        n_batches=batches, batch_size=batch_size, seed=seed,
    )
    save_baseline(profile, out)
    click.echo(f"wrote {out}", err=True)
    click.echo(
        f"baseline over {profile.n_batches} batches of {profile.batch_size}",
        err=True,
    )


@cli.command()
@click.option("--reference-preds", "reference_preds", required=True, type=click.Path(),
              help="Reference prediction CSV (p_tumor column).")
@click.option("--target-preds", "target_preds", required=True, type=click.Path(),
              help="Target prediction CSV.")
@click.option("--boundary", type=float, default=None,
              help="Decision boundary for the margin index.")
@click.option("--out", default="cdi.json", show_default=True, type=click.Path(),
              help="Report file to write.")
@format_option
@common_options
@click.pass_context
def cdi(ctx, reference_preds, target_preds, boundary, out, fmt, config_json, seed):
    """Compare confidence deviation indices between two prediction sets.

    Prints CDI_M, CDI_H and their deltas (plus AUC deltas when both
    files carry labels) and writes the full report.  Exits 2 when the
    margin index drops past the alarm threshold.
    """
    params = _parse_params(config_json, boundary=boundary)
    bundle = build_configs(params, seed=seed)
    ref = load_predictions_csv(reference_preds)
    tgt = load_predictions_csv(target_preds)
    report = cdi_report(ref, tgt, bundle.cdi)
    write_report(report, out, format=fmt)
    click.echo(
        f"CDI_M  ref={report.cdi_m_ref:.6f}  target={report.cdi_m_target:.6f}  "
        f"delta={report.delta_cdi_m:+.6f}"
    )
    click.echo(
        f"CDI_H  ref={report.cdi_h_ref:.6f}  target={report.cdi_h_target:.6f}  "
        f"delta={report.delta_cdi_h:+.6f}"
    )
    if report.auc_ref is not None:
        click.echo(
            f"AUC    ref={report.auc_ref:.6f}  target={report.auc_target:.6f}  "
            f"delta={report.delta_auc:+.6f}"
        )
    click.echo(f"wrote {out}", err=True)
    if report.alarm:
        click.echo(
            f"alarm: delta CDI_M {report.delta_cdi_m:+.6f} fell below "
            f"{report.alarm_threshold}",
            err=True,
        )
        ctx.exit(EXIT_ALARM)


@cli.command()
@click.option("--reference", required=True, type=click.Path(),
              help="Reference feature CSV.")
@click.option("--reference-preds", "reference_preds", required=True, type=click.Path(),
              help="Reference prediction CSV.")
@click.option("--target", required=True, type=click.Path(),
              help="Target feature CSV.")
@click.option("--target-preds", "target_preds", required=True, type=click.Path(),
              help="Target prediction CSV.")
@click.option("--metrics", default=",".join(DEFAULT_STUDY_METRICS),
              show_default=True, metavar="IDS",
              help="Comma-separated metric/detector ids to fold-normalize.")
@click.option("--batches", type=int, default=20, show_default=True,
              help="Number of target batches to sample.")
@click.option("--batch-size", type=int, default=5000, show_default=True,
              help="Samples per batch (drawn with replacement).")
@click.option("--baseline", "baseline_path", default=None, type=click.Path(),
              help="Baseline profile JSON; built from the reference when omitted.")
@click.option("--out", default="study.json", show_default=True, type=click.Path(),
              help="Report file to write.")
@format_option
@common_options
@click.pass_context
def study(ctx, reference, reference_preds, target, target_preds, metrics,
          batches, batch_size, baseline_path, out, fmt, config_json, seed):
    """Run the batched drift-and-reliability study.

    Samples target batches (stratified 50:50 when labels exist), scores
    each against the full reference, and tracks per-batch fold scores,
    confidence deltas, and AUC deltas.  Exits 2 when the mean margin
    delta falls past the alarm threshold.
    """
    params = _parse_params(config_json)
    bundle = build_configs(params, seed=seed)
    ref = load_features_csv(reference)
    ref_preds = load_predictions_csv(reference_preds)
    tgt = load_features_csv(target)
    tgt_preds = load_predictions_csv(target_preds)
    profile = load_baseline(baseline_path) if baseline_path else None
    report = run_batched_study(
        ref, ref_preds, tgt, tgt_preds,
        metric_ids=_split_ids(metrics),
        bundle=bundle,
        profile=profile,
        n_batches=batches,
        batch_size=batch_size,
        seed=seed,
    )
    write_report(report, out, format=fmt)
    click.echo(f"wrote {out}", err=True)
    if report.alarm:
        mean = report.aggregates["delta_cdi_m"]["mean"]
        click.echo(f"alarm: mean delta CDI_M {mean:+.6f}", err=True)
        ctx.exit(EXIT_ALARM)


@cli.command()
@click.option("--dataset", required=True, type=click.Path(),
              help="Feature or prediction CSV (loader chosen by selector).")
@click.option("--compare-with", "compare_with", default=None, type=click.Path(),
              help="Second CSV overlaid with shared bin edges.")
@click.option("--selector", required=True,
              help="Feature name, 'p_positive', or 'p_positive split by label'.")
@click.option("--bins", type=int, default=50, show_default=True,
              help="Number of equal-width bins.")
@click.option("--normalized", is_flag=True,
              help="Report bin fractions instead of counts.")
@click.option("--out", default="histogram.json", show_default=True, type=click.Path(),
              help="Histogram JSON to write.")
@common_options
def histogram(dataset, compare_with, selector, bins, normalized, out,
              config_json, seed):
    """Extract shared-edge histogram data for one selector."""
    del config_json, seed  # accepted for interface uniformity; not used
    loader = (
        load_predictions_csv if selector.startswith("p_positive") else load_features_csv
    )
    groups = [(_stem(dataset), loader(dataset))]
    if compare_with:
        name = _stem(compare_with)
        if name == groups[0][0]:
            name = f"{name} (2)"  # same file on both sides stays two series
        groups.append((name, loader(compare_with)))
    summary = feature_histogram(groups, selector, bins=bins, normalized=normalized)
    write_histogram(summary, out)
    click.echo(f"wrote {out}", err=True)


def _stem(path) -> str:
    base = os.path.basename(str(path))
    return base[:-4] if base.lower().endswith(".csv") else base


_KIND_ALIASES = {
    "id": "id",
    "benign": "benign_shift",
    "benign_shift": "benign_shift",
    "harmful": "harmful_shift",
    "harmful_shift": "harmful_shift",
}

# Shift sizes that land the synthetic scenarios in their intended
# regimes: clearly visible drift for benign, a clear confidence
# collapse for harmful.
_KIND_DEFAULT_MAGNITUDE = {"id": 0.0, "benign_shift": 5.0, "harmful_shift": 2.5}


@cli.command()
@click.option("--kind", required=True,
              type=click.Choice(sorted(_KIND_ALIASES), case_sensitive=False),
              help="Scenario kind.")
@click.option("--n", type=int, default=4000, show_default=True,
              help="Samples (even; half per class).")
@click.option("--d", type=int, default=16, show_default=True,
              help="Embedding dimension.")
@click.option("--separation", type=float, default=3.0, show_default=True,
              help="Distance between class means.")
@click.option("--magnitude", type=float, default=None,
              help="Shift magnitude [default: 0 id, 5 benign, 2.5 harmful].")
@click.option("--out-prefix", default="scenario", show_default=True,
              help="Writes <prefix>_features.csv and <prefix>_predictions.csv.")
@common_options
def synth(kind, n, d, separation, magnitude, out_prefix, config_json, seed):
    """Generate a synthetic scenario as feature and prediction CSVs.

    The files use the standard ingest formats, so every other command
    runs on them unchanged.
    """
    del config_json  # accepted for interface uniformity; not used
    kind = _KIND_ALIASES[kind.lower()]
    if magnitude is None:
        magnitude = _KIND_DEFAULT_MAGNITUDE[kind]
    config = ScenarioConfig(
        kind=kind, n=n, d=d,
        class_separation=separation,
        shift_magnitude=magnitude,
        seed=seed,
    )
    features, predictions, _head = generate_scenario(config)
    features_path = f"{out_prefix}_features.csv"
    predictions_path = f"{out_prefix}_predictions.csv"
    write_features_csv(features, features_path)
    write_predictions_csv(predictions, predictions_path)
    click.echo(f"wrote {features_path}", err=True)
    click.echo(f"wrote {predictions_path}", err=True)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data-dir", envvar="DOMAINSAT_DATA_DIR", default="domainsat_data",
              show_default=True, type=click.Path(file_okay=False),
              help="Directory for uploaded datasets and job results "
                   "[env: DOMAINSAT_DATA_DIR].")
@click.option("--workers", type=int, default=None,
              help="Job worker threads [default: CPU count].")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False),
              help="Built web UI bundle to serve at /.")
def serve(host, port, data_dir, workers, static_dir):
    """Start the HTTP API (and web UI, if a bundle is provided)."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise ToolboxError(f"cannot bind {host}:{port}: {exc}") from None
    finally:
        probe.close()

    import uvicorn

    from .service.app import create_app

    app = create_app(data_dir=data_dir, workers=workers, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    """Entry point with the stable exit-code contract."""
    try:
        # In non-standalone mode click returns ctx.exit codes rather
        # than raising SystemExit.
        code = cli.main(args=argv, standalone_mode=False)
        if isinstance(code, int) and code != 0:
            sys.exit(code)
    except click.exceptions.Exit as exc:
        if exc.exit_code != 0:
            sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(EXIT_ERROR)
    except ToolboxError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
