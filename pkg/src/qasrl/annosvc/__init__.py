"""Crowd annotation service: task state machine, quality control,
payments, and the HTTP API the annotation UI talks to."""

from .service import STATUS_BY_CODE, create_app
from .store import (
    AGREEMENT_THRESHOLD,
    AnnotationService,
    DEFAULT_LEASE_SECONDS,
    DEFAULT_VALIDATORS,
    GENERATION,
    GenerationOutcome,
    MIN_QUESTIONS_PER_VERB,
    QUALITY_WINDOW_VERBS,
    ServiceError,
    TASK_KINDS,
    TASK_STATES,
    TaskQuestion,
    TaskState,
    VALIDATION,
    VALIDITY_THRESHOLD,
    ValidationOutcome,
    WorkerStats,
    aggregate_validity,
    compute_payment,
    judgment_agrees,
    update_quality,
)

__all__ = [
    "AGREEMENT_THRESHOLD",
    "AnnotationService",
    "DEFAULT_LEASE_SECONDS",
    "DEFAULT_VALIDATORS",
    "GENERATION",
    "GenerationOutcome",
    "MIN_QUESTIONS_PER_VERB",
    "QUALITY_WINDOW_VERBS",
    "STATUS_BY_CODE",
    "ServiceError",
    "TASK_KINDS",
    "TASK_STATES",
    "TaskQuestion",
    "TaskState",
    "VALIDATION",
    "VALIDITY_THRESHOLD",
    "ValidationOutcome",
    "WorkerStats",
    "aggregate_validity",
    "compute_payment",
    "create_app",
    "judgment_agrees",
    "update_quality",
]
