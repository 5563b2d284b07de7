"""Shared builders for small hand-checked corpora used across test files."""

from qasrl.corpus import AnswerSpan, Judgment, QAPair, SentenceRecord, VerbEntry
from qasrl.grammar import QuestionSlots, VerbSlot, inflect

S = AnswerSpan


def question(wh, aux, subj, chain, form, obj, prep, misc):
    return QuestionSlots(wh, aux, subj, VerbSlot(chain, form), obj, prep, misc)


WHO_PAST_SOMEONE = question("who", "", "", "", "past", "someone", "", "")
WHO_DID_SOMEONE = question("who", "did", "someone", "", "stem", "", "", "")
WHEN_DID = question("when", "did", "someone", "", "stem", "someone", "", "")
WHEN_NO_SUBJ = QuestionSlots("when", "", "", VerbSlot("", "past"),
                             "someone", "", "")  # grammar rejects: no subject


def generation_pair(slots, spans, workers=("g", "v1", "v2")):
    """A question with writer plus validators all agreeing on the spans."""
    spans = tuple(spans)
    judgments = tuple(Judgment(w, True, spans) for w in workers)
    return QAPair(slots, judgments, "generation")


def record(sid, tokens, tags, verb_index, stem, qa, domain="other"):
    pairs = tuple(generation_pair(slots, [span]) for slots, span in qa)
    entry = VerbEntry(verb_index, inflect(stem), pairs)
    return SentenceRecord(sid, domain, tuple(tokens), tuple(tags), (entry,))


def toy_corpus():
    """Two sentences, five questions, everything hand-checkable."""
    blamed = [
        (WHO_PAST_SOMEONE, S(0, 0)),
        (WHO_DID_SOMEONE, S(2, 2)),
        (WHEN_DID, S(3, 3)),
    ]
    pushed = [
        (WHO_PAST_SOMEONE, S(0, 0)),
        (WHO_DID_SOMEONE, S(2, 2)),
    ]
    return [
        record("t1", ("Ann", "blamed", "Bob", "yesterday", "."),
               ("NNP", "VBD", "NNP", "RB", "."), 1, "blame", blamed),
        record("t2", ("Joe", "pushed", "Sam", "."),
               ("NNP", "VBD", "NNP", "."), 1, "push", pushed),
    ]
