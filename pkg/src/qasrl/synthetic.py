"""Deterministic synthetic corpus for overfitting checks and demos.

Tiny transitive sentences built by arithmetic cycling (no RNG), each with
one past-tense verb and mechanically derived question-answer labels, so a
model that has genuinely learned the mapping can reproduce the
annotations exactly.
"""

from __future__ import annotations

from .corpus import (
    DOMAINS,
    AnswerSpan,
    Judgment,
    QAPair,
    SentenceRecord,
    VerbEntry,
)
from .grammar import QuestionSlots, VerbSlot, inflect

NAMES = ("Ann", "Bob", "Joe", "Sam", "Max", "Ida", "Ned", "Eva")
VERBS = ("blame", "push", "help", "call", "chase",
         "follow", "watch", "thank", "greet", "trust")
TIMES = ("yesterday", "today")
WORKERS = ("g", "v1", "v2")

_SUBJECT_Q = QuestionSlots(wh="who", aux="", subj="", verb=VerbSlot("", "past"),
                           obj="someone", prep="", misc="")
_OBJECT_Q = QuestionSlots(wh="who", aux="did", subj="someone",
                          verb=VerbSlot("", "stem"), obj="", prep="", misc="")
_TIME_Q = QuestionSlots(wh="when", aux="did", subj="someone",
                        verb=VerbSlot("", "stem"), obj="someone",
                        prep="", misc="")
_WITH_Q = QuestionSlots(wh="who", aux="did", subj="someone",
                        verb=VerbSlot("", "stem"), obj="someone",
                        prep="with", misc="")


def _pair(slots: QuestionSlots, span: AnswerSpan) -> QAPair:
    judgments = tuple(Judgment(w, True, (span,)) for w in WORKERS)
    return QAPair(slots, judgments, "generation")


def synthetic_corpus(sentences: int = 50) -> list[SentenceRecord]:
    """Build the deterministic corpus; same input size, same output, always.

    Three sentence shapes cycle: "A verbed B .", "A verbed B <time> ." and
    "A verbed B with C .".  Answers are the single-token name and time
    spans; every question carries three identical valid judgments.
    """
    if sentences < 1:
        raise ValueError("need at least one sentence")
    corpus = []
    for i in range(sentences):
        subj = NAMES[i % len(NAMES)]
        obj = NAMES[(i + 3) % len(NAMES)]
        extra = NAMES[(i + 5) % len(NAMES)]
        verb = VERBS[i % len(VERBS)]
        inflections = inflect(verb)
        shape = i % 3

        tokens = [subj, inflections.past, obj]
        tags = ["NNP", "VBD", "NNP"]
        questions = [_pair(_SUBJECT_Q, AnswerSpan(0, 0)),
                     _pair(_OBJECT_Q, AnswerSpan(2, 2))]
        if shape == 1:
            tokens.append(TIMES[i % len(TIMES)])
            tags.append("RB")
            questions.append(_pair(_TIME_Q, AnswerSpan(3, 3)))
        elif shape == 2:
            tokens.extend(["with", extra])
            tags.extend(["IN", "NNP"])
            questions.append(_pair(_WITH_Q, AnswerSpan(4, 4)))
        tokens.append(".")
        tags.append(".")

        record = SentenceRecord(
            sentence_id=f"syn{i:03d}",
            domain=DOMAINS[i % len(DOMAINS)],
            tokens=tuple(tokens),
            pos_tags=tuple(tags),
            verb_entries=(VerbEntry(1, inflections, tuple(questions)),))
        record.validate()
        corpus.append(record)
    return corpus


__all__ = ["NAMES", "TIMES", "VERBS", "WORKERS", "synthetic_corpus"]
