"""On-disk formats: feature/prediction CSVs plus JSON and CSV report files.

CSV input is deliberately plain: UTF-8, one mandatory header row,
dot-decimal numbers.  Feature files carry an optional ``id`` column, an
optional ``label`` column in {0, 1}, and numeric feature columns.
Prediction files carry ``p_tumor`` in [0, 1] with the same optional
columns.  Malformed input is always a hard error carrying its 1-based
line and column; rows are never silently dropped or reordered.

JSON is the canonical report format (reports nest).  The CSV report
export flattens per-feature detail to one row per (algorithm, feature)
for spreadsheet work and is not meant to be read back; runtime error
messages stay in the JSON form only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .core import (
    BaselineProfile,
    CdiReport,
    FeatureMatrix,
    HistogramSummary,
    PredictionSet,
    validate,
    validate_predictions,
)
from .errors import InvalidConfig, IoError, ParseError, RangeError, SchemaError
from .pipeline import BatchedStudyReport, ShiftReport

REPORT_CSV_HEADER = (
    "section",
    "name",
    "feature",
    "value",
    "fold_value",
    "p_value",
    "corrected_p",
    "alarm",
)


@dataclass(frozen=True)
class CsvSchema:
    """Column roles for one CSV load.

    Explicitly named columns must exist in the header.  When a role is
    left as None the conventional name is picked up if present: ``id``,
    ``label``, and ``p_tumor``.  feature_columns=None means every column
    not claimed by another role is a feature.
    """

    id_column: str | None = None
    label_column: str | None = None
    probability_column: str | None = None
    feature_columns: tuple[str, ...] | None = None


def _read_table(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Return (header, [(1-based physical line, cells), ...])."""
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            reader = csv.reader(fh)
            table = [(line_no, row) for line_no, row in enumerate(reader, start=1)]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not valid UTF-8: {exc}") from None
    if not table:
        raise ParseError(f"{path} is empty; a header row is required", line=1)
    header = [cell.strip() for cell in table[0][1]]
    if any(name == "" for name in header):
        raise SchemaError(f"{path}: header has an empty column name")
    if len(set(header)) != len(header):
        dupes = sorted({n for n in header if header.count(n) > 1})
        raise SchemaError(f"{path}: duplicate column names {dupes}")
    body = []
    for line_no, row in table[1:]:
        if not row:
            continue  # blank line
        if len(row) != len(header):
            raise ParseError(
                f"line {line_no}: expected {len(header)} cells, got {len(row)}",
                line=line_no,
            )
        body.append((line_no, row))
    return header, body


def _pick_column(header: list[str], explicit: str | None, default: str) -> str | None:
    if explicit is not None:
        if explicit not in header:
            raise SchemaError(
                f"declared column {explicit!r} is not in the header {header}"
            )
        return explicit
    return default if default in header else None


def _parse_cell(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(
            f"line {line}, column {column!r}: cannot parse {cell!r} as a number",
            line=line,
            column=column,
        ) from None
    if not np.isfinite(value):
        raise ParseError(
            f"line {line}, column {column!r}: non-finite value {cell!r}",
            line=line,
            column=column,
        )
    return value


def _parse_label(cell: str, line: int, column: str) -> int:
    value = _parse_cell(cell, line, column)
    if value not in (0.0, 1.0):
        raise ParseError(
            f"line {line}, column {column!r}: label must be 0 or 1, got {cell!r}",
            line=line,
            column=column,
        )
    return int(value)


def _feature_block(
    body: list[tuple[int, list[str]]],
    header: list[str],
    feature_names: list[str],
) -> np.ndarray:
    """Parse the feature cells of every row, locating any bad cell."""
    col_idx = [header.index(name) for name in feature_names]
    cells = [[row[j] for j in col_idx] for _, row in body]
    try:
        arr = np.array(cells, dtype=np.float64)
    except ValueError:
        for (line_no, _), row_cells in zip(body, cells):
            for name, cell in zip(feature_names, row_cells):
                _parse_cell(cell, line_no, name)
        raise  # unreachable: the rescan raises first
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        _parse_cell(cells[i][j], body[i][0], feature_names[j])
    return arr


def load_features_csv(path, schema: CsvSchema | None = None) -> FeatureMatrix:
    """Load a feature table; row i of the file becomes row i of the matrix."""
    schema = schema or CsvSchema()
    header, body = _read_table(path)
    id_col = _pick_column(header, schema.id_column, "id")
    label_col = _pick_column(header, schema.label_column, "label")
    prob_col = _pick_column(header, schema.probability_column, "p_tumor")
    if schema.feature_columns is not None:
        feature_names = list(schema.feature_columns)
        for name in feature_names:
            if name not in header:
                raise SchemaError(
                    f"declared feature column {name!r} is not in the header {header}"
                )
    else:
        claimed = {id_col, label_col, prob_col}
        feature_names = [name for name in header if name not in claimed]
    if not feature_names:
        raise SchemaError(f"{path}: no feature columns")
    if not body:
        raise SchemaError(f"{path}: no data rows")

    rows = _feature_block(body, header, feature_names)
    sample_ids = None
    if id_col is not None:
        j = header.index(id_col)
        sample_ids = tuple(row[j] for _, row in body)
    labels = None
    if label_col is not None:
        j = header.index(label_col)
        labels = np.array(
            [_parse_label(row[j], line_no, label_col) for line_no, row in body],
            dtype=np.int64,
        )
    matrix = FeatureMatrix(
        feature_names=tuple(feature_names),
        rows=rows,
        sample_ids=sample_ids,
        labels=labels,
    )
    validate(matrix)
    return matrix


def load_predictions_csv(path, schema: CsvSchema | None = None) -> PredictionSet:
    """Load per-sample positive-class probabilities (column ``p_tumor``)."""
    schema = schema or CsvSchema()
    header, body = _read_table(path)
    prob_col = _pick_column(header, schema.probability_column, "p_tumor")
    if prob_col is None:
        raise SchemaError(
            f"{path}: no probability column; declare one or name it 'p_tumor'"
        )
    id_col = _pick_column(header, schema.id_column, "id")
    label_col = _pick_column(header, schema.label_column, "label")
    if not body:
        raise SchemaError(f"{path}: no data rows")

    j_prob = header.index(prob_col)
    p = np.empty(len(body), dtype=np.float64)
    for i, (line_no, row) in enumerate(body):
        value = _parse_cell(row[j_prob], line_no, prob_col)
        if not 0.0 <= value <= 1.0:
            raise RangeError(
                f"line {line_no}, column {prob_col!r}: "
                f"probability {row[j_prob]} outside [0, 1]"
            )
        p[i] = value
    sample_ids = None
    if id_col is not None:
        j = header.index(id_col)
        sample_ids = tuple(row[j] for _, row in body)
    labels = None
    if label_col is not None:
        j = header.index(label_col)
        labels = np.array(
            [_parse_label(row[j], line_no, label_col) for line_no, row in body],
            dtype=np.int64,
        )
    preds = PredictionSet(p_positive=p, sample_ids=sample_ids, labels=labels)
    validate_predictions(preds)
    return preds


def _float_text(value: float) -> str:
    """Shortest decimal text that parses back to the same float."""
    return repr(float(value))


def _open_for_write(path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def write_features_csv(matrix: FeatureMatrix, path) -> None:
    header: list[str] = []
    if matrix.sample_ids is not None:
        header.append("id")
    header.extend(matrix.feature_names)
    if matrix.labels is not None:
        header.append("label")
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(matrix.n):
            row: list[str] = []
            if matrix.sample_ids is not None:
                row.append(matrix.sample_ids[i])
            row.extend(_float_text(v) for v in matrix.rows[i])
            if matrix.labels is not None:
                row.append(str(int(matrix.labels[i])))
            writer.writerow(row)


def write_predictions_csv(preds: PredictionSet, path) -> None:
    header: list[str] = []
    if preds.sample_ids is not None:
        header.append("id")
    header.append("p_tumor")
    if preds.labels is not None:
        header.append("label")
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(preds.n):
            row = []
            if preds.sample_ids is not None:
                row.append(preds.sample_ids[i])
            row.append(_float_text(preds.p_positive[i]))
            if preds.labels is not None:
                row.append(str(int(preds.labels[i])))
            writer.writerow(row)


def _write_json(payload: dict, path) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _float_text(value)
    return str(value)


def _row(section, name, feature="", value=None, fold=None, p=None, corrected=None, alarm=""):
    return (
        section,
        name,
        feature,
        _cell(value),
        _cell(fold),
        _cell(p),
        _cell(corrected),
        _cell(alarm),
    )


def flatten_report(report) -> list[tuple[str, ...]]:
    """Rows of the CSV export: one per score, per (algorithm, feature), per batch cell."""
    rows: list[tuple[str, ...]] = []
    if isinstance(report, ShiftReport):
        for score in report.scores:
            rows.append(_row("metric", score.metric_name, value=score.raw_value, fold=score.fold_value))
            for feature, value in (score.detail or {}).items():
                rows.append(_row("metric", score.metric_name, feature, value))
        for test in report.tests:
            rows.append(_row("test", test.test_name, value=test.statistic, p=test.p_value, alarm=test.alarm))
            for ft in test.per_feature:
                rows.append(_row("test", test.test_name, ft.feature, ft.statistic, p=ft.p_value, corrected=ft.corrected_p))
        for det in report.detectors:
            rows.append(_row("detector", det.detector_name, value=det.score))
        if rows:  # a report where nothing ran flattens to the header alone
            rows.append(_row("summary", "alarm", alarm=report.alarm))
    elif isinstance(report, CdiReport):
        named = [
            ("cdi_m_ref", report.cdi_m_ref),
            ("cdi_m_target", report.cdi_m_target),
            ("delta_cdi_m", report.delta_cdi_m),
            ("cdi_h_ref", report.cdi_h_ref),
            ("cdi_h_target", report.cdi_h_target),
            ("delta_cdi_h", report.delta_cdi_h),
            ("auc_ref", report.auc_ref),
            ("auc_target", report.auc_target),
            ("delta_auc", report.delta_auc),
        ]
        for name, value in named:
            if value is not None:
                rows.append(_row("cdi", name, value=value))
        rows.append(_row("summary", "alarm", alarm=report.alarm))
    elif isinstance(report, BatchedStudyReport):
        for record in report.records:
            batch = str(record.batch_index)
            for metric_id, fold in record.folds.items():
                rows.append(_row("batch", metric_id, batch, fold, fold=fold))
            rows.append(_row("batch", "delta_cdi_m", batch, record.delta_cdi_m))
            rows.append(_row("batch", "delta_cdi_h", batch, record.delta_cdi_h))
            if record.delta_auc is not None:
                rows.append(_row("batch", "delta_auc", batch, record.delta_auc))
        for column, stats in report.aggregates.items():
            for stat_name, value in stats.items():
                rows.append(_row("aggregate", column, stat_name, value))
        for key, value in report.reference.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                rows.append(_row("reference", key, value=value))
        rows.append(_row("summary", "alarm", alarm=report.alarm))
    else:
        raise InvalidConfig(f"cannot flatten {type(report).__name__} to CSV")
    return rows


def write_report(report, path, format: str = "json") -> None:
    """Write a report as canonical JSON or as the flattened CSV export."""
    if format == "json":
        _write_json(report.to_dict(), path)
    elif format == "csv":
        rows = flatten_report(report)
        with _open_for_write(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_CSV_HEADER)
            writer.writerows(rows)
    else:
        raise InvalidConfig(f"unknown report format {format!r}; use json or csv")


_REPORT_KINDS = {
    "shift": ShiftReport,
    "cdi": CdiReport,
    "study": BatchedStudyReport,
}


def read_report(path):
    """Read a JSON report back into its dataclass, dispatched on "kind"."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}", line=exc.lineno) from None
    kind = payload.get("kind")
    cls = _REPORT_KINDS.get(kind)
    if cls is None:
        raise SchemaError(
            f"{path}: unknown report kind {kind!r}; expected one of "
            + ", ".join(sorted(_REPORT_KINDS))
        )
    return cls.from_dict(payload)


def save_baseline(profile: BaselineProfile, path) -> None:
    payload = {"kind": "baseline", **profile.to_dict()}
    _write_json(payload, path)


def load_baseline(path) -> BaselineProfile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}", line=exc.lineno) from None
    if payload.get("kind") not in (None, "baseline"):
        raise SchemaError(f"{path}: not a baseline file (kind={payload.get('kind')!r})")
    return BaselineProfile.from_dict(payload)


def write_histogram(summary: HistogramSummary, path) -> None:
    _write_json(summary.to_dict(), path)


def read_histogram(path) -> HistogramSummary:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}", line=exc.lineno) from None
    return HistogramSummary.from_dict(payload)
