"""Annotation workflow state: tasks, leases, quality control, payments.

One writer composes questions per verb; a configured number of validators
then judge each question, answering it or marking it invalid.  Tasks move
open -> assigned -> submitted -> complete, with expired leases falling
back to open.  All mutations pass through one lock and append to an event
log, so a crashed service rebuilds its exact state by replaying the log.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field, replace

from ..corpus import (
    AnswerSpan,
    Judgment,
    QAPair,
    SentenceRecord,
    aggregate_validity,
    corpus_stats,
    question_is_valid,
)
from ..grammar import GrammarError, QuestionSlots, nfa_accepts

GENERATION = "generation"
VALIDATION = "validation"
TASK_KINDS = (GENERATION, VALIDATION)
TASK_STATES = ("open", "assigned", "submitted", "complete")

DEFAULT_LEASE_SECONDS = 30 * 60
DEFAULT_VALIDATORS = 2
QUALITY_WINDOW_VERBS = 10
VALIDITY_THRESHOLD = 0.85
AGREEMENT_THRESHOLD = 0.85
MIN_QUESTIONS_PER_VERB = 2.0


class ServiceError(Exception):
    """A refused operation, with a machine-readable code and detail."""

    def __init__(self, code: str, message: str, detail=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message,
                "detail": self.detail}


# -- payments -------------------------------------------------------------


def compute_payment(kind: str, count: int) -> int:
    """Task payment in cents for a given number of questions.

    Writers earn 5c for the first question, then 5c, 6c, 7c... for each
    further one.  Validators earn 8c per verb plus 2c per question beyond
    four.  Expansion validators earn a 2c base plus 2c per question after
    the first.
    """
    if count < 0:
        raise ValueError("question count cannot be negative")
    if kind == "generation":
        if count < 1:
            raise ValueError("a generation task pays for at least 1 question")
        return 5 + sum(5 + (i - 2) for i in range(2, count + 1))
    if kind == "validation":
        return 8 + 2 * max(0, count - 4)
    if kind == "expansion":
        if count < 1:
            raise ValueError("an expansion task pays for at least 1 question")
        return 2 + 2 * (count - 1)
    raise ValueError(f"unknown task kind: {kind!r}")


# -- worker quality -------------------------------------------------------


@dataclass(frozen=True)
class WorkerStats:
    """Accumulated counts behind the qualification thresholds."""

    worker_id: str
    questions_written: int = 0
    questions_judged_valid: int = 0
    verbs_annotated: int = 0
    validation_judgments: int = 0
    agreement_hits: int = 0
    disqualified: bool = False

    def __post_init__(self):
        if self.agreement_hits > self.validation_judgments:
            raise ValueError("more agreement hits than judgments")

    @property
    def validity_rate(self) -> float:
        if not self.questions_written:
            return 1.0
        return self.questions_judged_valid / self.questions_written

    @property
    def agreement_rate(self) -> float:
        if not self.validation_judgments:
            return 1.0
        return self.agreement_hits / self.validation_judgments

    @property
    def questions_per_verb(self) -> float:
        if not self.verbs_annotated:
            return 0.0
        return self.questions_written / self.verbs_annotated

    def to_json(self) -> dict:
        return {
            "workerId": self.worker_id,
            "questionsWritten": self.questions_written,
            "questionsJudgedValid": self.questions_judged_valid,
            "verbsAnnotated": self.verbs_annotated,
            "validationJudgments": self.validation_judgments,
            "agreementHits": self.agreement_hits,
            "validityRate": round(self.validity_rate, 4),
            "agreementRate": round(self.agreement_rate, 4),
            "disqualified": self.disqualified,
        }


@dataclass(frozen=True)
class GenerationOutcome:
    """One completed verb from its writer's point of view."""

    worker_id: str
    questions: int
    valid_questions: int


@dataclass(frozen=True)
class ValidationOutcome:
    """One completed verb from one validator's point of view."""

    worker_id: str
    judgments: int
    hits: int


def update_quality(stats: WorkerStats, events) -> WorkerStats:
    """Fold completed-verb outcomes into the stats and apply thresholds.

    Disqualification only kicks in once a worker has a 10-verb history.
    Writers then need an 85% validity rate and a 2-question mean per verb;
    validators need an 85% agreement rate.  verbs_annotated counts
    completed verbs in either role, and each threshold binds only workers
    active in that role.
    """
    written = stats.questions_written
    valid = stats.questions_judged_valid
    verbs = stats.verbs_annotated
    judgments = stats.validation_judgments
    hits = stats.agreement_hits
    for event in events:
        if isinstance(event, GenerationOutcome):
            written += event.questions
            valid += event.valid_questions
            verbs += 1
        elif isinstance(event, ValidationOutcome):
            judgments += event.judgments
            hits += event.hits
            verbs += 1
        else:
            raise TypeError(f"not a quality event: {event!r}")

    out = WorkerStats(stats.worker_id, written, valid, verbs,
                      judgments, hits, stats.disqualified)
    if out.disqualified or verbs < QUALITY_WINDOW_VERBS:
        return out
    if written and (out.validity_rate < VALIDITY_THRESHOLD
                    or out.questions_per_verb < MIN_QUESTIONS_PER_VERB):
        return replace(out, disqualified=True)
    if judgments and out.agreement_rate < AGREEMENT_THRESHOLD:
        return replace(out, disqualified=True)
    return out


def judgment_agrees(judgment: Judgment, others) -> bool:
    """Whether one judgment agrees with the majority of the other workers.

    others holds (isValid, spans) pairs, the writer counting as one worker.
    An invalid mark agrees when most others also marked invalid; an answer
    agrees when at least one of its spans overlaps spans given by a
    majority of the others.
    """
    others = list(others)
    half = len(others) / 2
    if not judgment.is_valid:
        return sum(1 for ok, _ in others if not ok) > half
    for span in judgment.spans:
        support = sum(1 for ok, spans in others
                      if ok and any(span.overlaps(s) for s in spans))
        if support > half:
            return True
    return False


# -- tasks ----------------------------------------------------------------


@dataclass
class TaskQuestion:
    """One question inside a validation task, with the writer's answers."""

    slots: QuestionSlots
    writer_spans: tuple[AnswerSpan, ...]

    def to_json(self) -> dict:
        return {"slots": self.slots.to_json(),
                "spans": [[s.start, s.end] for s in self.writer_spans]}


@dataclass
class TaskState:
    task_id: str
    kind: str
    sentence_id: str
    verb_index: int
    required: int
    excluded: set = field(default_factory=set)
    questions: list = field(default_factory=list)  # validation only
    leases: dict = field(default_factory=dict)  # worker -> expiry
    submissions: dict = field(default_factory=dict)  # worker -> payload

    def active_leases(self, now: float) -> dict:
        return {w: t for w, t in self.leases.items() if t > now}

    def state(self, now: float) -> str:
        if len(self.submissions) >= self.required:
            return "complete"
        if self.submissions:
            return "submitted"
        if self.active_leases(now):
            return "assigned"
        return "open"

    def to_json(self, now: float) -> dict:
        return {
            "taskId": self.task_id,
            "kind": self.kind,
            "sentenceId": self.sentence_id,
            "verbIndex": self.verb_index,
            "requiredJudgments": self.required,
            "state": self.state(now),
        }


class AnnotationService:
    """In-memory task store with an append-only event log behind it."""

    def __init__(self, records=None, *, validators: int = DEFAULT_VALIDATORS,
                 lease_seconds: float = DEFAULT_LEASE_SECONDS,
                 clock=time.time, log_path=None, rules=None):
        if validators < 1:
            raise ValueError("need at least one validator")
        self._lock = threading.Lock()
        self._clock = clock
        self._validators = validators
        self._lease_seconds = lease_seconds
        self._rules = rules
        self._log_path = log_path
        self._records: dict[str, SentenceRecord] = {}
        self._annotations: dict[tuple, list] = {}
        self._tasks: dict[str, TaskState] = {}
        self._stats: dict[str, WorkerStats] = {}
        self._payments: list[tuple] = []  # (taskId, worker, cents)
        if records:
            for record in records:
                self.add_sentence(record)

    # -- event plumbing ---------------------------------------------------

    def _append(self, event: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False))
            fh.write("\n")

    @classmethod
    def recover(cls, log_path, **kwargs) -> "AnnotationService":
        """Rebuild a service by replaying its event log."""
        service = cls(log_path=None, **kwargs)
        with open(log_path, encoding="utf-8") as fh:
            for number, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                    service._apply(event)
                except (KeyError, ValueError, TypeError) as exc:
                    raise ServiceError(
                        "corrupt-log", f"event log line {number}: {exc}")
        service._log_path = log_path
        return service

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "sentence":
            self._apply_sentence(SentenceRecord.from_json(event["record"]))
        elif kind == "lease":
            task = self._tasks[event["taskId"]]
            task.leases[event["worker"]] = float(event["expires"])
        elif kind == "generation":
            pairs = [(QuestionSlots.from_json(q["slots"]),
                      tuple(AnswerSpan(int(s), int(e)) for s, e in q["spans"]))
                     for q in event["qaPairs"]]
            self._apply_generation(event["taskId"], event["worker"], pairs)
        elif kind == "validation":
            judgments = [
                Judgment(event["worker"], bool(j["isValid"]),
                         tuple(AnswerSpan(int(s), int(e))
                               for s, e in j["spans"]))
                for j in event["judgments"]]
            self._apply_validation(event["taskId"], event["worker"], judgments)
        else:
            raise ServiceError("corrupt-log", f"unknown event {kind!r}")

    # -- sentences and task seeding ---------------------------------------

    def add_sentence(self, record: SentenceRecord) -> None:
        record.validate()
        with self._lock:
            if record.sentence_id in self._records:
                raise ServiceError("duplicate-sentence",
                                   f"sentence {record.sentence_id!r} already "
                                   "loaded")
            self._apply_sentence(record)
            self._append({"event": "sentence", "record": record.to_json()})

    def _apply_sentence(self, record: SentenceRecord) -> None:
        self._records[record.sentence_id] = record
        for entry in record.verb_entries:
            key = (record.sentence_id, entry.verb_index)
            self._annotations[key] = list(entry.qa_pairs)
            if not entry.qa_pairs:
                task_id = f"g:{record.sentence_id}:{entry.verb_index}"
                self._tasks[task_id] = TaskState(
                    task_id, GENERATION, record.sentence_id,
                    entry.verb_index, required=1)

    # -- assignment -------------------------------------------------------

    def next_task(self, worker_id: str, kind: str) -> dict:
        """Lease the first available task of a kind to the worker."""
        if kind not in TASK_KINDS:
            raise ServiceError("bad-kind", f"unknown task kind {kind!r}")
        now = self._clock()
        with self._lock:
            stats = self._stats.get(worker_id)
            if stats is not None and stats.disqualified:
                raise ServiceError("worker-disqualified",
                                   f"worker {worker_id!r} is disqualified")
            task = self._find_task(worker_id, kind, now)
            if task is None:
                raise ServiceError("no-tasks",
                                   f"no open {kind} tasks for this worker")
            expires = now + self._lease_seconds
            task.leases[worker_id] = expires
            self._append({"event": "lease", "taskId": task.task_id,
                          "worker": worker_id, "expires": expires})
            return self._task_view(task, now)

    def _find_task(self, worker_id: str, kind: str, now: float):
        for task_id in sorted(self._tasks):
            task = self._tasks[task_id]
            if task.kind != kind or task.state(now) == "complete":
                continue
            if worker_id in task.excluded or worker_id in task.submissions:
                continue
            active = task.active_leases(now)
            if worker_id in active:
                return task  # re-request refreshes the same lease
            # leases of workers who already submitted no longer hold a slot
            pending = [w for w in active if w not in task.submissions]
            capacity = task.required - len(task.submissions) - len(pending)
            if capacity > 0:
                return task
        return None

    def _task_view(self, task: TaskState, now: float) -> dict:
        record = self._records[task.sentence_id]
        entry = next(e for e in record.verb_entries
                     if e.verb_index == task.verb_index)
        view = task.to_json(now)
        view["tokens"] = list(record.tokens)
        view["inflections"] = entry.inflections.to_json()
        if task.kind == VALIDATION:
            view["questions"] = [q.to_json() for q in task.questions]
        return view

    def _leased_task(self, task_id: str, worker_id: str, kind: str,
                     now: float) -> TaskState:
        task = self._tasks.get(task_id)
        if task is None:
            raise ServiceError("unknown-task", f"no task {task_id!r}")
        if task.kind != kind:
            raise ServiceError("wrong-kind",
                               f"task {task_id!r} is a {task.kind} task")
        if task.state(now) == "complete":
            raise ServiceError("task-complete",
                               f"task {task_id!r} is already complete")
        # a standing submission keeps the right to resubmit (last wins)
        # even after the lease runs out
        if task.leases.get(worker_id, 0.0) <= now \
                and worker_id not in task.submissions:
            raise ServiceError("lease-expired",
                               f"worker {worker_id!r} holds no active lease "
                               f"on {task_id!r}")
        return task

    # -- generation -------------------------------------------------------

    def submit_generation(self, task_id: str, worker_id: str,
                          qa_pairs) -> dict:
        """Accept a writer's questions or refuse with per-question reasons.

        qa_pairs holds (QuestionSlots, spans) pairs.  Acceptance spawns the
        validation task for the same verb.
        """
        now = self._clock()
        with self._lock:
            task = self._leased_task(task_id, worker_id, GENERATION, now)
            record = self._records[task.sentence_id]
            pairs = [(slots, tuple(spans)) for slots, spans in qa_pairs]
            errors = self._generation_errors(pairs, len(record.tokens))
            if errors:
                raise ServiceError("invalid-submission",
                                   "submission violates the task rules",
                                   detail=errors)
            event = {"event": "generation", "taskId": task_id,
                     "worker": worker_id,
                     "qaPairs": [{"slots": slots.to_json(),
                                  "spans": [[s.start, s.end] for s in spans]}
                                 for slots, spans in pairs]}
            self._apply_generation(task_id, worker_id, pairs)
            self._append(event)
            return {"accepted": True, "taskId": task_id,
                    "validationTaskId": f"v:{task.sentence_id}:{task.verb_index}",
                    "payment": compute_payment(GENERATION, len(pairs))}

    @staticmethod
    def _generation_errors(pairs, sentence_length: int):
        errors = []

        def flag(index, code, message):
            errors.append({"question": index, "code": code,
                           "message": message})

        if not pairs:
            return [{"question": None, "code": "empty-submission",
                     "message": "at least one question is required"}]
        seen = {}
        for i, (slots, spans) in enumerate(pairs):
            try:
                if not nfa_accepts(slots):
                    flag(i, "ungrammatical",
                         "question rejected by the slot grammar")
            except GrammarError as exc:
                flag(i, "ungrammatical", str(exc))
            key = slots.astuple()
            if key in seen:
                flag(i, "duplicate-question",
                     f"same question as #{seen[key]}")
            else:
                seen[key] = i
            if not spans:
                flag(i, "no-answer", "every question needs an answer span")
            for span in spans:
                if span.end >= sentence_length:
                    flag(i, "span-out-of-range",
                         f"span ({span.start}, {span.end}) leaves the "
                         "sentence")
        overlapping = set()
        for i, (_, spans_a) in enumerate(pairs):
            for j in range(i + 1, len(pairs)):
                spans_b = pairs[j][1]
                if any(a.overlaps(b) for a in spans_a for b in spans_b):
                    overlapping.update((i, j))
        for i in sorted(overlapping):
            flag(i, "overlap",
                 "answers of distinct questions must not overlap")
        return errors

    def _apply_generation(self, task_id: str, worker_id: str, pairs) -> None:
        task = self._tasks[task_id]
        task.submissions[worker_id] = pairs
        validation_id = f"v:{task.sentence_id}:{task.verb_index}"
        self._tasks[validation_id] = TaskState(
            validation_id, VALIDATION, task.sentence_id, task.verb_index,
            required=self._validators, excluded={worker_id},
            questions=[TaskQuestion(slots, spans) for slots, spans in pairs])
        self._payments.append((task_id, worker_id,
                               compute_payment(GENERATION, len(pairs))))

    # -- validation -------------------------------------------------------

    def submit_validation(self, task_id: str, worker_id: str,
                          judgments) -> dict:
        """Record one validator's per-question judgments.

        judgments holds (isValid, spans) pairs aligned with the task's
        questions.  Resubmission before completion replaces the earlier
        one; the final required submission completes the verb.
        """
        now = self._clock()
        with self._lock:
            task = self._leased_task(task_id, worker_id, VALIDATION, now)
            record = self._records[task.sentence_id]
            pairs = [(bool(ok), tuple(spans)) for ok, spans in judgments]
            errors = self._validation_errors(task, pairs, len(record.tokens))
            if errors:
                raise ServiceError("invalid-submission",
                                   "judgments violate the task rules",
                                   detail=errors)
            built = [Judgment(worker_id, ok, spans) for ok, spans in pairs]
            event = {"event": "validation", "taskId": task_id,
                     "worker": worker_id,
                     "judgments": [{"isValid": j.is_valid,
                                    "spans": [[s.start, s.end]
                                              for s in j.spans]}
                                   for j in built]}
            self._apply_validation(task_id, worker_id, built)
            self._append(event)
            return {"accepted": True, "taskId": task_id,
                    "complete": task.state(now) == "complete",
                    "payment": compute_payment(VALIDATION, len(built))}

    @staticmethod
    def _validation_errors(task: TaskState, pairs, sentence_length: int):
        errors = []
        if len(pairs) != len(task.questions):
            return [{"question": None, "code": "wrong-count",
                     "message": f"expected {len(task.questions)} judgments, "
                                f"got {len(pairs)}"}]
        for i, (is_valid, spans) in enumerate(pairs):
            if is_valid and not spans:
                errors.append({"question": i, "code": "no-answer",
                               "message": "a valid question needs at least "
                                          "one answer span"})
            if not is_valid and spans:
                errors.append({"question": i, "code": "spans-on-invalid",
                               "message": "an invalid mark cannot carry "
                                          "answer spans"})
            for span in spans:
                if span.end >= sentence_length:
                    errors.append({"question": i, "code": "span-out-of-range",
                                   "message": f"span ({span.start}, "
                                              f"{span.end}) leaves the "
                                              "sentence"})
        flagged = set()
        for i, (_, spans_a) in enumerate(pairs):
            for j in range(i + 1, len(pairs)):
                spans_b = pairs[j][1]
                if any(x.overlaps(y) for x in spans_a for y in spans_b):
                    flagged.update((i, j))
        for i in sorted(flagged):
            errors.append({"question": i, "code": "overlap",
                           "message": "your answers to distinct questions "
                                      "must not overlap"})
        return errors

    def _apply_validation(self, task_id: str, worker_id: str,
                          judgments) -> None:
        task = self._tasks[task_id]
        task.submissions[worker_id] = judgments
        if len(task.submissions) >= task.required:
            for v, submitted in task.submissions.items():
                self._payments.append((task_id, v,
                                       compute_payment(VALIDATION,
                                                       len(submitted))))
            self._complete_validation(task)

    def _complete_validation(self, task: TaskState) -> None:
        generation_task = self._tasks[f"g:{task.sentence_id}:{task.verb_index}"]
        ((writer, writer_pairs),) = generation_task.submissions.items()
        validators = list(task.submissions)
        pairs = []
        for qi, question in enumerate(task.questions):
            writer_judgment = Judgment(writer, True, question.writer_spans)
            validator_judgments = tuple(task.submissions[v][qi]
                                        for v in validators)
            pairs.append(QAPair(question.slots,
                                (writer_judgment,) + validator_judgments,
                                "generation"))
        self._annotations[(task.sentence_id, task.verb_index)].extend(pairs)

        valid = sum(1 for pair in pairs
                    if question_is_valid(pair, self._rules))
        self._update_worker(writer, [GenerationOutcome(
            writer, len(pairs), valid)])
        for v in validators:
            hits = 0
            for qi, question in enumerate(task.questions):
                mine = task.submissions[v][qi]
                others = [(True, question.writer_spans)]
                others += [(task.submissions[o][qi].is_valid,
                            task.submissions[o][qi].spans)
                           for o in validators if o != v]
                hits += judgment_agrees(mine, others)
            self._update_worker(v, [ValidationOutcome(
                v, len(task.questions), hits)])

    def _update_worker(self, worker_id: str, events) -> None:
        stats = self._stats.get(worker_id, WorkerStats(worker_id))
        self._stats[worker_id] = update_quality(stats, events)

    # -- read side --------------------------------------------------------

    def export(self) -> list[SentenceRecord]:
        """Current corpus: every sentence with its completed annotations."""
        with self._lock:
            out = []
            for sentence_id in sorted(self._records):
                record = self._records[sentence_id]
                entries = tuple(
                    replace(entry, qa_pairs=tuple(
                        self._annotations[(sentence_id, entry.verb_index)]))
                    for entry in record.verb_entries)
                out.append(replace(record, verb_entries=entries))
            return out

    def stats(self) -> dict:
        corpus = self.export()
        now = self._clock()
        with self._lock:
            by_state = dict.fromkeys(TASK_STATES, 0)
            for task in self._tasks.values():
                by_state[task.state(now)] += 1
            return {
                "tasks": by_state,
                "workers": [self._stats[w].to_json()
                            for w in sorted(self._stats)],
                "payments": {
                    "totalCents": sum(c for _, _, c in self._payments),
                    "byTask": [{"taskId": t, "worker": w, "cents": c}
                               for t, w, c in self._payments],
                },
                "corpus": corpus_stats(corpus, self._rules).to_json(),
            }

    def task_state(self, task_id: str) -> str:
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise ServiceError("unknown-task", f"no task {task_id!r}")
            return task.state(self._clock())


__all__ = [
    "AGREEMENT_THRESHOLD",
    "AnnotationService",
    "DEFAULT_LEASE_SECONDS",
    "DEFAULT_VALIDATORS",
    "GENERATION",
    "GenerationOutcome",
    "MIN_QUESTIONS_PER_VERB",
    "QUALITY_WINDOW_VERBS",
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
    "judgment_agrees",
    "update_quality",
]
