"""Auto-suggest: fully-formed questions about uncovered argument positions.

A question extracts exactly one position; suggestions target positions no
prior question has extracted yet, ranked subject, object, prep-object,
misc, with ties broken by vocabulary order.  Negated auxiliaries are
never suggested.
"""

from __future__ import annotations

from .inflection import InflectionTable
from .nfa import Automaton, nfa_accepts
from .slots import QuestionSlots, VerbSlot

POSITIONS = ("subj", "obj", "prep-obj", "misc")


def extracted_position(slots: QuestionSlots) -> str | None:
    """Argument position a question's wh stands in for, None for adjuncts.

    Structural classification: an empty subj is a subject extraction; a
    where-question with a subject extracts the locative misc position;
    who/what questions extract the prep object when a preposition dangles,
    the object when the obj slot is empty, and the misc position otherwise.
    """
    if slots.subj == "":
        return "subj"
    if slots.wh == "where":
        return "misc"
    if slots.wh in ("who", "what"):
        if slots.prep != "" and slots.misc == "":
            return "prep-obj"
        if slots.obj == "":
            return "obj"
        return "misc"
    return None


def auto_suggest(prior_questions: list[QuestionSlots],
                 inflections: InflectionTable,
                 automaton: Automaton | None = None) -> list[QuestionSlots]:
    """Ranked complete questions extracting positions the priors left uncovered.

    Suggestion content is built from evidence in the prior questions: a
    transitive reading is assumed only once some prior fills or extracts
    the object, prep-object suggestions reuse prepositions the priors
    used, and locative suggestions appear only after a locative prior.
    With no priors only subject questions are suggested.
    """
    for q in prior_questions:
        if not nfa_accepts(q, automaton):
            raise ValueError(f"prior question rejected by the grammar: {q}")

    covered = {extracted_position(q) for q in prior_questions}
    covered.discard(None)

    has_obj = any(q.obj != "" for q in prior_questions) or "obj" in covered
    seen_preps: list[str] = []
    for q in prior_questions:
        if q.prep and q.prep not in seen_preps:
            seen_preps.append(q.prep)
    has_locative = any(q.misc == "somewhere" or q.wh == "where" for q in prior_questions)

    obj_fill = "something" if has_obj else ""
    candidates: list[QuestionSlots] = []

    if "subj" not in covered:
        for wh in ("who", "what"):
            candidates.append(QuestionSlots(
                wh=wh, aux="", subj="", verb=VerbSlot("", "past"),
                obj=obj_fill, prep="", misc=""))
    if "obj" not in covered and has_obj:
        for wh in ("who", "what"):
            candidates.append(QuestionSlots(
                wh=wh, aux="did", subj="someone", verb=VerbSlot("", "stem"),
                obj="", prep="", misc=""))
    if "prep-obj" not in covered:
        for prep in seen_preps:
            for wh in ("who", "what"):
                candidates.append(QuestionSlots(
                    wh=wh, aux="did", subj="someone", verb=VerbSlot("", "stem"),
                    obj=obj_fill, prep=prep, misc=""))
    if "misc" not in covered and has_locative:
        candidates.append(QuestionSlots(
            wh="where", aux="did", subj="someone", verb=VerbSlot("", "stem"),
            obj=obj_fill, prep="", misc=""))

    prior_set = set(prior_questions)
    out: list[QuestionSlots] = []
    for cand in candidates:
        if cand in prior_set or cand in out:
            continue
        if not nfa_accepts(cand, automaton):
            continue
        pos = extracted_position(cand)
        if pos is None or pos in covered:
            continue
        out.append(cand)
    return out
