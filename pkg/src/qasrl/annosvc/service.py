"""HTTP facade over the annotation store.

Thin JSON plumbing only: payload parsing, error-code-to-status mapping,
and the autocomplete proxy that serves the composer UI.  All decisions
live in the store and the grammar.
"""

from __future__ import annotations

import json

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from ..corpus import AnswerSpan, CorpusError, record_to_line
from ..grammar import (
    GrammarError,
    QuestionSlots,
    autocomplete,
    auto_suggest,
    inflect,
    render,
)
from .store import AnnotationService, ServiceError

STATUS_BY_CODE = {
    "no-tasks": 404,
    "unknown-task": 404,
    "worker-disqualified": 403,
    "lease-expired": 409,
    "task-complete": 409,
    "wrong-kind": 409,
    "duplicate-sentence": 409,
    "invalid-submission": 422,
    "bad-kind": 422,
    "bad-request": 422,
}


def _bad_request(message: str, detail=None) -> ServiceError:
    return ServiceError("bad-request", message, detail)


def _parse_qa_pairs(raw) -> list:
    """Decode [{slots, spans}] into (QuestionSlots, spans) pairs."""
    if not isinstance(raw, list):
        raise _bad_request("qaPairs must be a list")
    pairs = []
    problems = []
    for i, item in enumerate(raw):
        try:
            slots = QuestionSlots.from_json(item["slots"])
            spans = tuple(AnswerSpan(int(s), int(e))
                          for s, e in item.get("spans", []))
            pairs.append((slots, spans))
        except (KeyError, TypeError, ValueError, CorpusError) as exc:
            problems.append({"question": i, "code": "malformed",
                             "message": str(exc)})
    if problems:
        raise ServiceError("invalid-submission",
                           "could not decode the submission", problems)
    return pairs


def _parse_judgments(raw) -> list:
    """Decode [{isValid, spans}] into (bool, spans) pairs."""
    if not isinstance(raw, list):
        raise _bad_request("judgments must be a list")
    out = []
    problems = []
    for i, item in enumerate(raw):
        try:
            spans = tuple(AnswerSpan(int(s), int(e))
                          for s, e in item.get("spans", []))
            out.append((bool(item["isValid"]), spans))
        except (KeyError, TypeError, ValueError, CorpusError) as exc:
            problems.append({"question": i, "code": "malformed",
                             "message": str(exc)})
    if problems:
        raise ServiceError("invalid-submission",
                           "could not decode the judgments", problems)
    return out


def _decode_prefix(prefix: str) -> list:
    """Prefix query param: JSON list, verb value as [auxChain, form]."""
    try:
        values = json.loads(prefix) if prefix else []
    except json.JSONDecodeError as exc:
        raise _bad_request(f"prefix is not valid JSON: {exc}")
    if not isinstance(values, list):
        raise _bad_request("prefix must be a JSON list of slot values")
    out = []
    for value in values:
        if isinstance(value, list):
            if len(value) != 2:
                raise _bad_request("a verb slot value is a "
                                   "[auxChain, form] pair")
            out.append((str(value[0]), str(value[1])))
        elif isinstance(value, str):
            out.append(value)
        else:
            raise _bad_request(f"bad slot value: {value!r}")
    return out


def _decode_committed(committed: str) -> list:
    try:
        items = json.loads(committed) if committed else []
    except json.JSONDecodeError as exc:
        raise _bad_request(f"committed is not valid JSON: {exc}")
    if not isinstance(items, list):
        raise _bad_request("committed must be a JSON list of slot objects")
    try:
        return [QuestionSlots.from_json(item) for item in items]
    except (KeyError, TypeError, GrammarError) as exc:
        raise _bad_request(f"bad committed question: {exc}")


def _display(value, inflections) -> str:
    if isinstance(value, tuple):
        chain, form = value
        surface = inflections.surface(form)
        return f"{chain} {surface}".strip()
    return value


def create_app(service: AnnotationService) -> FastAPI:
    app = FastAPI(title="qasrl annotation service")
    # The annotation UI may be served from a different origin (e.g. a
    # static file server during development); workers are opaque ids, so
    # open CORS costs nothing.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ServiceError)
    async def service_error(request: Request, exc: ServiceError):
        status = STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content=exc.to_json())

    @app.get("/api/task/next")
    def next_task(worker: str, kind: str):
        return service.next_task(worker, kind)

    @app.post("/api/task/{task_id}/generation")
    def submit_generation(task_id: str, payload: dict = Body(...)):
        worker = payload.get("worker")
        if not isinstance(worker, str) or not worker:
            raise _bad_request("worker is required")
        pairs = _parse_qa_pairs(payload.get("qaPairs", []))
        return service.submit_generation(task_id, worker, pairs)

    @app.post("/api/task/{task_id}/validation")
    def submit_validation(task_id: str, payload: dict = Body(...)):
        worker = payload.get("worker")
        if not isinstance(worker, str) or not worker:
            raise _bad_request("worker is required")
        judgments = _parse_judgments(payload.get("judgments", []))
        return service.submit_validation(task_id, worker, judgments)

    @app.get("/api/autocomplete")
    def autocomplete_route(verb: str, prefix: str = "", committed: str = ""):
        try:
            inflections = inflect(verb)
        except ValueError as exc:
            raise _bad_request(f"bad verb {verb!r}: {exc}")
        values = _decode_prefix(prefix)
        priors = _decode_committed(committed)
        try:
            completions = autocomplete(values)
        except GrammarError as exc:
            raise _bad_request(f"prefix rejected by the grammar: {exc}")
        try:
            suggestions = auto_suggest(priors, inflections)
        except ValueError as exc:
            raise _bad_request(str(exc))
        return {
            "verb": verb,
            "slotIndex": len(values),
            "completions": [
                {"value": list(v) if isinstance(v, tuple) else v,
                 "display": _display(v, inflections)}
                for v in completions],
            "suggestions": [
                {"slots": slots.to_json(),
                 "rendered": render(slots, inflections)}
                for slots in suggestions],
        }

    @app.get("/api/stats")
    def stats():
        return service.stats()

    @app.get("/api/export")
    def export():
        lines = [record_to_line(record) for record in service.export()]
        body = "\n".join(lines)
        if body:
            body += "\n"
        return PlainTextResponse(body, media_type="application/x-ndjson")

    return app


__all__ = ["STATUS_BY_CODE", "create_app"]
