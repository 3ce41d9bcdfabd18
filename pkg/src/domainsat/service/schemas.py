"""Request bodies accepted by the HTTP API."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class JobCreate(BaseModel):
    """One analysis job.

    detect and baseline read feature datasets; cdi reads prediction
    datasets; study reads a feature and a prediction dataset per side.
    ``algorithms`` falls back to the kind's default panel and ``config``
    is a flat mapping of parameter name to value, validated against the
    algorithm catalog before the job is queued.
    """

    kind: Literal["detect", "baseline", "cdi", "study"]
    reference_id: str
    target_id: str | None = None
    reference_predictions_id: str | None = None
    target_predictions_id: str | None = None
    algorithms: list[str] | None = None
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    n_batches: int = Field(default=20, ge=1)
    batch_size: int = Field(default=5000, ge=1)
