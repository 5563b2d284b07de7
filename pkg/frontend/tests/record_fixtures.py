#!/usr/bin/env python3
"""Record HTTP fixtures for the frontend test suite.

Runs the real annotation service in-process and captures every exchange
the browser client would make, so the TypeScript tests can replay them
without a running server.  Run from the repository root with the Python
package installed:

    python3 frontend/tests/record_fixtures.py

Writes two files next to this script, under fixtures/:

  autocomplete_parity.json   100 random reachable slot prefixes (random
                             walks over the server's own completions,
                             across several verbs) with the full
                             autocomplete response for each.
  e2e_session.json           one scripted annotation session: lease a
                             generation task, compose two questions
                             (one slot by slot, one from a suggestion),
                             highlight answers, run two validators, and
                             export the finished corpus record.

Each entry stores the request structurally ({method, path, params,
body}) plus {status, response} (or {status, text} for the ndjson
export), in the exact order the client issues them.
"""

import json
import random
from pathlib import Path

from fastapi.testclient import TestClient

from qasrl import SentenceRecord, VerbEntry, inflect
from qasrl.annosvc import AnnotationService, create_app

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"

PARITY_PREFIXES = 100
PARITY_SEED = 20240814
PARITY_STEMS = ("blame", "refuse", "put", "appear", "give", "describe")


def encode(value):
    """Query-parameter encoding: strings pass through, the rest is JSON."""
    if isinstance(value, str):
        return value
    return json.dumps(value, separators=(",", ":"))


class Recorder:
    """Issue requests against a TestClient and log each exchange."""

    def __init__(self, client: TestClient):
        self.client = client
        self.entries = []

    def get(self, path: str, params: dict | None = None) -> dict:
        wire = {k: encode(v) for k, v in (params or {}).items()}
        response = self.client.get(path, params=wire)
        entry = {"method": "GET", "path": path, "params": params or {},
                 "status": response.status_code}
        ctype = response.headers.get("content-type", "")
        if ctype.startswith("application/json"):
            entry["response"] = response.json()
        else:
            entry["text"] = response.text
        self.entries.append(entry)
        return entry

    def post(self, path: str, body: dict) -> dict:
        response = self.client.post(path, json=body)
        entry = {"method": "POST", "path": path, "body": body,
                 "status": response.status_code,
                 "response": response.json()}
        self.entries.append(entry)
        return entry


def bare_sentence() -> SentenceRecord:
    """One unannotated sentence, so a generation task opens for its verb."""
    tokens = ("Kim", "blamed", "Pat", "for", "the", "mess", ".")
    tags = ("NNP", "VBD", "NNP", "IN", "DT", "NN", ".")
    entry = VerbEntry(verb_index=1, inflections=inflect("blame"), qa_pairs=())
    record = SentenceRecord(sentence_id="fix-blame-0", domain="other",
                            tokens=tokens, pos_tags=tags,
                            verb_entries=(entry,))
    record.validate()
    return record


def slots_from_values(values: list) -> dict:
    """Wire slot object for a complete 7-value assignment."""
    chain, form = values[3]
    return {"wh": values[0], "aux": values[1], "subj": values[2],
            "auxChain": chain, "verbForm": form,
            "obj": values[4], "prep": values[5], "misc": values[6]}


def record_parity() -> dict:
    """Random walks over the server's completions, one entry per prefix."""
    service = AnnotationService([bare_sentence()])
    rec = Recorder(TestClient(create_app(service)))
    rng = random.Random(PARITY_SEED)
    stem_cursor = 0
    verb = PARITY_STEMS[stem_cursor]
    prefix: list = []
    while len(rec.entries) < PARITY_PREFIXES:
        entry = rec.get("/api/autocomplete",
                        {"verb": verb, "prefix": prefix, "committed": []})
        assert entry["status"] == 200, entry
        completions = entry["response"]["completions"]
        if not completions or rng.random() < 0.3:
            stem_cursor += 1
            verb = PARITY_STEMS[stem_cursor % len(PARITY_STEMS)]
            prefix = []
        else:
            prefix = prefix + [rng.choice(completions)["value"]]
    return {"entries": rec.entries}


def record_session() -> dict:
    """The scripted end-to-end session the e2e test replays verbatim."""
    service = AnnotationService([bare_sentence()], validators=2)
    rec = Recorder(TestClient(create_app(service)))

    task = rec.get("/api/task/next",
                   {"worker": "gen-1", "kind": "generation"})["response"]
    assert task["kind"] == "generation", task
    stem = task["inflections"]["stem"]

    # Question 1, composed slot by slot; every chosen value must be on
    # the server's completion list for its prefix, like the UI enforces.
    q1_values = ["who", "", "", ["", "past"], "someone", "", ""]
    prefix: list = []
    entry = rec.get("/api/autocomplete",
                    {"verb": stem, "prefix": prefix, "committed": []})
    for value in q1_values:
        offered = [json.dumps(c["value"]) for c in entry["response"]["completions"]]
        assert json.dumps(value) in offered, (value, offered)
        prefix = prefix + [value]
        entry = rec.get("/api/autocomplete",
                        {"verb": stem, "prefix": prefix, "committed": []})
    assert entry["response"]["completions"] == []  # prefix is complete
    q1_slots = slots_from_values(q1_values)

    # Question 2 comes from the suggestion list once question 1 counts
    # as committed.
    entry = rec.get("/api/autocomplete",
                    {"verb": stem, "prefix": [], "committed": [q1_slots]})
    rendered = [s["rendered"] for s in entry["response"]["suggestions"]]
    assert "Who did someone blame?" in rendered, rendered
    q2_slots = next(s["slots"] for s in entry["response"]["suggestions"]
                    if s["rendered"] == "Who did someone blame?")

    gen = rec.post(f"/api/task/{task['taskId']}/generation",
                   {"worker": "gen-1",
                    "qaPairs": [{"slots": q1_slots, "spans": [[0, 0]]},
                                {"slots": q2_slots, "spans": [[2, 2]]}]})
    assert gen["status"] == 200 and gen["response"]["accepted"] is True, gen

    for n, worker in enumerate(("val-1", "val-2"), start=1):
        vtask = rec.get("/api/task/next",
                        {"worker": worker, "kind": "validation"})["response"]
        assert vtask["kind"] == "validation", vtask
        assert len(vtask["questions"]) == 2, vtask
        out = rec.post(f"/api/task/{vtask['taskId']}/validation",
                       {"worker": worker,
                        "judgments": [{"isValid": True, "spans": [[0, 0]]},
                                      {"isValid": True, "spans": [[2, 2]]}]})
        assert out["status"] == 200, out
        assert out["response"]["complete"] == (n == 2), out

    export = rec.get("/api/export", {})
    assert export["status"] == 200 and export.get("text"), export
    return {"entries": rec.entries}


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    for name, fixture in (("autocomplete_parity.json", record_parity()),
                          ("e2e_session.json", record_session())):
        path = FIXTURES / name
        path.write_text(json.dumps(fixture, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(fixture['entries'])} entries)")


if __name__ == "__main__":
    main()
