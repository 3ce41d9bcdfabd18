"""FastAPI application factory for the analysis service.

Uploads are validated CSV datasets, analyses run as asynchronous jobs
on a bounded thread pool, and every error body follows one envelope:
``{"error": {"code", "message", "detail"}}``.  Job results are exactly
the reports the command line produces for the same inputs and seed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__
from ..baseline import build_baseline
from ..cdi import cdi_report
from ..errors import (
    InvalidConfig,
    MissingLabels,
    ParseError,
    RangeError,
    SchemaError,
    ToolboxError,
    UnknownFeature,
    UnknownMetric,
)
from ..pipeline import feature_histogram, run_batched_study, run_shift_analysis
from ..registry import (
    DEFAULT_DETECT_ALGOS,
    DEFAULT_STUDY_METRICS,
    DETECTOR_IDS,
    METRIC_IDS,
    TEST_IDS,
    build_configs,
    catalog_dicts,
)
from .schemas import JobCreate
from .store import DATASET_KINDS, DatasetStore, JobStore, now_utc

DEFAULT_MAX_UPLOAD_BYTES = 256 * 1024 * 1024

# Dataset kind each job kind requires, per request field.
_JOB_DATASET_FIELDS: dict[str, tuple[tuple[str, str], ...]] = {
    "detect": (("reference_id", "features"), ("target_id", "features")),
    "baseline": (("reference_id", "features"),),
    "cdi": (("reference_id", "predictions"), ("target_id", "predictions")),
    "study": (
        ("reference_id", "features"),
        ("target_id", "features"),
        ("reference_predictions_id", "predictions"),
        ("target_predictions_id", "predictions"),
    ),
}


class ServiceError(Exception):
    """Maps one failure to an HTTP status and the error envelope."""

    def __init__(self, status: int, code: str, message: str, detail: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail or {}


def _envelope(code: str, message: str, detail: dict | None = None) -> dict:
    return {"error": {"code": code, "message": message, "detail": detail or {}}}


def _route_algorithms(kind: str, algorithms) -> dict:
    """Split one flat id list into family-specific tuples, validating ids."""
    if kind == "detect":
        ids = tuple(algorithms) if algorithms is not None else DEFAULT_DETECT_ALGOS
        allowed = METRIC_IDS + TEST_IDS + DETECTOR_IDS
    else:  # baseline and study fold only scalar-valued algorithms
        ids = tuple(algorithms) if algorithms is not None else DEFAULT_STUDY_METRICS
        allowed = METRIC_IDS + DETECTOR_IDS
    for algo_id in ids:
        if algo_id not in allowed:
            raise UnknownMetric(
                f"unknown algorithm {algo_id!r}; valid ids here: " + ", ".join(allowed)
            )
    return {
        "metric_ids": tuple(a for a in ids if a in METRIC_IDS),
        "test_ids": tuple(a for a in ids if a in TEST_IDS),
        "detector_ids": tuple(a for a in ids if a in DETECTOR_IDS),
        "scalar_ids": tuple(a for a in ids if a in METRIC_IDS + DETECTOR_IDS),
    }


def create_app(
    data_dir,
    workers: int | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
    static_dir=None,
) -> FastAPI:
    datasets = DatasetStore(data_dir)
    jobs = JobStore(data_dir)
    pool_size = workers or os.cpu_count() or 2
    executor = ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="job")

    app = FastAPI(title="domainsat", version=__version__, docs_url="/api/docs")
    app.state.datasets = datasets
    app.state.jobs = jobs
    app.state.executor = executor

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content=_envelope(exc.code, exc.message, exc.detail),
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        errors = [
            {"loc": [str(part) for part in err.get("loc", ())], "msg": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=422,
            content=_envelope("validation_error", "invalid request", {"errors": errors}),
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content=_envelope("http_error", str(exc.detail)),
        )

    def public(record: dict) -> dict:
        return {key: value for key, value in record.items() if key != "path"}

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/api/algorithms")
    def algorithms():
        return {
            "algorithms": catalog_dicts(),
            "defaults": {
                "detect": list(DEFAULT_DETECT_ALGOS),
                "baseline": list(DEFAULT_STUDY_METRICS),
                "study": list(DEFAULT_STUDY_METRICS),
            },
        }

    @app.post("/api/datasets", status_code=201)
    async def upload_dataset(
        file: UploadFile = File(...),
        kind: str = Form(...),
        name: str = Form(None),
    ):
        if kind not in DATASET_KINDS:
            raise ServiceError(
                422, "invalid_kind", f"kind must be one of {list(DATASET_KINDS)}"
            )
        data = bytearray()
        while chunk := await file.read(1 << 20):
            data.extend(chunk)
            if len(data) > max_upload_bytes:
                raise ServiceError(
                    413,
                    "too_large",
                    f"upload exceeds the {max_upload_bytes} byte limit",
                )
        try:
            record = datasets.add(name or file.filename or "dataset", kind, bytes(data))
        except ParseError as exc:
            raise ServiceError(
                400,
                "parse_error",
                str(exc),
                {"line": exc.line, "column": exc.column},
            ) from None
        except (SchemaError, RangeError, ToolboxError, ValueError) as exc:
            raise ServiceError(400, "invalid_dataset", str(exc)) from None
        return public(record)

    @app.get("/api/datasets")
    def list_datasets():
        return {"datasets": [public(r) for r in datasets.list()]}

    @app.get("/api/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        record = datasets.get(dataset_id)
        if record is None:
            raise ServiceError(404, "not_found", f"no dataset {dataset_id!r}")
        return public(record)

    @app.delete("/api/datasets/{dataset_id}", status_code=204)
    def delete_dataset(dataset_id: str):
        if not datasets.delete(dataset_id):
            raise ServiceError(404, "not_found", f"no dataset {dataset_id!r}")

    @app.get("/api/datasets/{dataset_id}/histogram")
    def dataset_histogram(
        dataset_id: str,
        selector: str = Query(...),
        bins: int = Query(default=50, ge=1, le=10000),
        compare_with: str | None = Query(default=None),
        normalized: bool = Query(default=False),
    ):
        record = datasets.get(dataset_id)
        if record is None:
            raise ServiceError(404, "not_found", f"no dataset {dataset_id!r}")
        groups = [(record["name"], datasets.load(record))]
        if compare_with is not None:
            other = datasets.get(compare_with)
            if other is None:
                raise ServiceError(404, "not_found", f"no dataset {compare_with!r}")
            name = other["name"]
            if name == record["name"]:
                name = f"{name} (2)"
            groups.append((name, datasets.load(other)))
        try:
            summary = feature_histogram(groups, selector, bins=bins, normalized=normalized)
        except (UnknownFeature, MissingLabels, InvalidConfig) as exc:
            raise ServiceError(422, "bad_selector", str(exc)) from None
        return summary.to_dict()

    def resolve_job_datasets(body: JobCreate) -> dict[str, dict]:
        """404 for unknown ids, 409 for kind mismatches, 422 for missing fields."""
        resolved = {}
        for field, wanted_kind in _JOB_DATASET_FIELDS[body.kind]:
            dataset_id = getattr(body, field)
            if dataset_id is None:
                raise ServiceError(
                    422, "invalid_config", f"{body.kind} jobs require {field}"
                )
            record = datasets.get(dataset_id)
            if record is None:
                raise ServiceError(404, "not_found", f"no dataset {dataset_id!r}")
            if record["kind"] != wanted_kind:
                raise ServiceError(
                    409,
                    "kind_mismatch",
                    f"{field} must reference a {wanted_kind} dataset, "
                    f"got {record['kind']!r} ({dataset_id})",
                )
            resolved[field] = record
        return resolved

    def compute_job(request: dict) -> dict:
        """Body of one job; runs on a worker thread, deterministic per seed."""
        body = JobCreate(**request)
        bundle = build_configs(body.config, seed=body.seed)
        routed = _route_algorithms(body.kind, body.algorithms)
        records = resolve_job_datasets(body)
        loaded = {field: datasets.load(record) for field, record in records.items()}
        if body.kind == "detect":
            report = run_shift_analysis(
                loaded["reference_id"],
                loaded["target_id"],
                metric_ids=routed["metric_ids"],
                test_ids=routed["test_ids"],
                detector_ids=routed["detector_ids"],
                bundle=bundle,
                seed=body.seed,
            )
            return report.to_dict()
        if body.kind == "baseline":
            profile = build_baseline(
                loaded["reference_id"],
                routed["scalar_ids"],
                bundle,
                n_batches=body.n_batches,
                batch_size=body.batch_size,
                seed=body.seed,
            )
            return {"kind": "baseline", **profile.to_dict()}
        if body.kind == "cdi":
            report = cdi_report(
                loaded["reference_id"], loaded["target_id"], bundle.cdi
            )
            return report.to_dict()
        report = run_batched_study(
            loaded["reference_id"],
            loaded["reference_predictions_id"],
            loaded["target_id"],
            loaded["target_predictions_id"],
            metric_ids=routed["scalar_ids"],
            bundle=bundle,
            n_batches=body.n_batches,
            batch_size=body.batch_size,
            seed=body.seed,
        )
        return report.to_dict()

    def execute_job(job_id: str) -> None:
        jobs.update(job_id, status="running")
        record = jobs.get(job_id)
        try:
            result = compute_job(record["request"])
        except Exception as exc:
            jobs.update(job_id, status="error", error=str(exc), finished_at=now_utc())
            return
        jobs.update(job_id, status="done", result=result, finished_at=now_utc())

    @app.post("/api/jobs", status_code=202)
    def create_job(body: JobCreate):
        resolve_job_datasets(body)
        try:
            build_configs(body.config, seed=body.seed)
            _route_algorithms(body.kind, body.algorithms)
        except (InvalidConfig, UnknownMetric) as exc:
            raise ServiceError(422, "invalid_config", str(exc)) from None
        record = jobs.create(kind=body.kind, request=body.model_dump())
        executor.submit(execute_job, record["id"])
        return {key: value for key, value in record.items() if key != "result"}

    @app.get("/api/jobs")
    def list_jobs():
        summaries = []
        for record in jobs.list():
            summary = {k: v for k, v in record.items() if k != "result"}
            summary["has_result"] = record["result"] is not None
            summaries.append(summary)
        return {"jobs": summaries}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        record = jobs.get(job_id)
        if record is None:
            raise ServiceError(404, "not_found", f"no job {job_id!r}")
        return record

    @app.get("/api/jobs/{job_id}/result")
    def get_job_result(job_id: str):
        record = jobs.get(job_id)
        if record is None:
            raise ServiceError(404, "not_found", f"no job {job_id!r}")
        if record["status"] == "error":
            raise ServiceError(
                409, "job_failed", record["error"] or "job failed", {"job": job_id}
            )
        if record["status"] != "done":
            raise ServiceError(
                409,
                "not_done",
                f"job {job_id} is {record['status']}",
                {"status": record["status"]},
            )
        return record["result"]

    if static_dir is not None and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def root():
            return {"service": "domainsat", "version": __version__, "api": "/api"}

    return app
