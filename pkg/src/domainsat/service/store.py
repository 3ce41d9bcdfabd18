"""Persistent dataset and job registries backing the HTTP API.

Datasets live as raw CSV files under ``<root>/datasets/`` next to a JSON
index; jobs live in a second JSON index that embeds finished results.
There is no database.  Each store guards its in-memory index and index
file with one lock, and index writes are atomic (temp file + rename) so
a crash never leaves a half-written index.

Restart semantics: datasets survive as-is; jobs that were pending or
running when the process died are marked ``error`` with the message
"interrupted" on the next start.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from ..core import FeatureMatrix, PredictionSet
from ..ingest import load_features_csv, load_predictions_csv

DATASET_KINDS = ("features", "predictions")
JOB_KINDS = ("detect", "baseline", "cdi", "study")


def now_utc() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _new_id() -> str:
    return uuid.uuid4().hex[:12]


def _atomic_write_json(path: Path, payload) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def _read_json(path: Path) -> dict:
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


class DatasetStore:
    def __init__(self, root):
        self.root = Path(root)
        self.csv_dir = self.root / "datasets"
        self.csv_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "datasets.json"
        self._lock = threading.Lock()
        self._records: dict[str, dict] = _read_json(self.index_path)

    def _persist(self) -> None:
        _atomic_write_json(self.index_path, self._records)

    def add(self, name: str, kind: str, data: bytes) -> dict:
        """Persist one upload; the CSV must parse before it is indexed."""
        if kind not in DATASET_KINDS:
            raise ValueError(f"kind must be one of {DATASET_KINDS}, got {kind!r}")
        dataset_id = _new_id()
        rel_path = f"datasets/{dataset_id}.csv"
        full_path = self.root / rel_path
        full_path.write_bytes(data)
        try:
            loaded = self._load_path(full_path, kind)
        except Exception:
            full_path.unlink(missing_ok=True)
            raise
        is_features = isinstance(loaded, FeatureMatrix)
        record = {
            "id": dataset_id,
            "name": name,
            "kind": kind,
            "n": loaded.n,
            "d": loaded.d if is_features else 1,
            "columns": list(loaded.feature_names) if is_features else ["p_positive"],
            "has_labels": loaded.labels is not None,
            "uploaded_at": now_utc(),
            "path": rel_path,
        }
        with self._lock:
            self._records[dataset_id] = record
            self._persist()
        return record

    def get(self, dataset_id: str) -> dict | None:
        with self._lock:
            record = self._records.get(dataset_id)
            return dict(record) if record else None

    def list(self) -> list[dict]:
        with self._lock:
            records = [dict(r) for r in self._records.values()]
        return sorted(records, key=lambda r: (r["uploaded_at"], r["id"]))

    def delete(self, dataset_id: str) -> bool:
        with self._lock:
            record = self._records.pop(dataset_id, None)
            if record is None:
                return False
            self._persist()
        (self.root / record["path"]).unlink(missing_ok=True)
        return True

    @staticmethod
    def _load_path(path: Path, kind: str) -> FeatureMatrix | PredictionSet:
        if kind == "features":
            return load_features_csv(path)
        return load_predictions_csv(path)

    def load(self, record: dict) -> FeatureMatrix | PredictionSet:
        """Parse a stored dataset back into its in-memory form."""
        return self._load_path(self.root / record["path"], record["kind"])


class JobStore:
    def __init__(self, root):
        self.index_path = Path(root) / "jobs.json"
        self.index_path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: dict[str, dict] = _read_json(self.index_path)
        interrupted = [
            r for r in self._records.values() if r["status"] in ("pending", "running")
        ]
        for record in interrupted:
            record["status"] = "error"
            record["error"] = "interrupted"
            record["finished_at"] = now_utc()
        if interrupted:
            _atomic_write_json(self.index_path, self._records)

    def _persist(self) -> None:
        _atomic_write_json(self.index_path, self._records)

    def create(self, kind: str, request: dict) -> dict:
        record = {
            "id": _new_id(),
            "kind": kind,
            "status": "pending",
            "request": request,
            "result": None,
            "error": None,
            "created_at": now_utc(),
            "finished_at": None,
        }
        with self._lock:
            self._records[record["id"]] = record
            self._persist()
        return dict(record)

    def update(self, job_id: str, **changes) -> dict:
        with self._lock:
            record = self._records[job_id]
            record.update(changes)
            self._persist()
            return dict(record)

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            record = self._records.get(job_id)
            return dict(record) if record else None

    def list(self) -> list[dict]:
        with self._lock:
            records = [dict(r) for r in self._records.values()]
        return sorted(records, key=lambda r: (r["created_at"], r["id"]))
