"""Drive the annotation service end to end, in process.

A writer leases a generation task and submits two questions; two
validators confirm them; the service aggregates validity, pays per the
schedule, and the event log replays to the same state.

Run: python demos/annotation_session.py
"""

import os
import tempfile

from qasrl import inflect, render
from qasrl.annosvc import AnnotationService
from qasrl.corpus import AnswerSpan, QuestionSlots, SentenceRecord, VerbEntry
from qasrl.grammar import VerbSlot

tokens = ("Ann", "blamed", "Bob", "yesterday", ".")
record = SentenceRecord(
    "demo-1", "other", tokens, ("NNP", "VBD", "NNP", "RB", "."),
    (VerbEntry(1, inflect("blame"), ()),))

log = os.path.join(tempfile.mkdtemp(), "events.jsonl")
service = AnnotationService([record], log_path=log)
print(f"sentence: {' '.join(tokens)}")
print(f"event log: {log}")

task = service.next_task("writer", "generation")
print(f"\nwriter leases {task['taskId']}")

who_past = QuestionSlots("who", "", "", VerbSlot("", "past"),
                         "someone", "", "")
who_did = QuestionSlots("who", "did", "someone", VerbSlot("", "stem"),
                        "", "", "")
result = service.submit_generation(
    task["taskId"], "writer",
    [(who_past, [AnswerSpan(0, 0)]), (who_did, [AnswerSpan(2, 2)])])
print(f"writer paid {result['payment']}c for 2 questions")

for validator in ("vera", "vikram"):
    vtask = service.next_task(validator, "validation")
    for q in vtask["questions"]:
        slots = QuestionSlots.from_json(q["slots"])
        print(f"  {validator} sees: "
              f"{render(slots, record.verb_entries[0].inflections)}")
    outcome = service.submit_validation(
        vtask["taskId"], validator,
        [(True, [AnswerSpan(0, 0)]), (True, [AnswerSpan(2, 2)])])
    print(f"  {validator} paid {outcome['payment']}c"
          f" (complete: {outcome['complete']})")

stats = service.stats()
print(f"\ntask states: {stats['tasks']}")
print(f"payments: {stats['payments']['totalCents']}c total")

replayed = AnnotationService.recover(log)
same = [r.to_json() for r in replayed.export()] == \
    [r.to_json() for r in service.export()]
print(f"replaying the log reproduces the corpus: {same}")

exported = service.export()[0]
pair = exported.verb_entries[0].qa_pairs[0]
print(f"exported first question with {len(pair.judgments)} judgments, "
      f"source {pair.source!r}")
