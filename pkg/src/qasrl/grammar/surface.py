"""Rendering slot tuples to question strings and parsing them back.

Rendering joins the non-empty slot surfaces with single spaces,
capitalizes the first character, and appends "?".  Parsing inverts this
by backtracking recursive descent; on the accepted language the two are
mutually inverse.
"""

from __future__ import annotations

from .inflection import InflectionTable
from .nfa import Automaton, nfa_accepts
from .slots import (
    AUX_VALUES,
    GrammarError,
    MISC_VALUES,
    QuestionSlots,
    VERB_PAIRS,
    VerbSlot,
    default_prepositions,
)

_PAIRS = frozenset(VERB_PAIRS)

# Longer chains first so "have been" wins over "have" during parsing.
_CHAINS_LONGEST_FIRST = ("have been", "being", "been", "have", "be", "")


def render(slots: QuestionSlots, inflections: InflectionTable,
           automaton: Automaton | None = None) -> str:
    """Render an NFA-valid slot tuple as a question string."""
    if not nfa_accepts(slots, automaton):
        raise GrammarError(f"cannot render slot tuple rejected by the grammar: {slots}")
    verb = slots.verb
    parts = [slots.wh, slots.aux, slots.subj]
    if verb.aux_chain:
        parts.append(verb.aux_chain)
    parts.append(inflections.surface(verb.form))
    parts.extend([slots.obj, slots.prep, slots.misc])
    text = " ".join(p for p in parts if p)
    return text[0].upper() + text[1:] + "?"


class ParseError(GrammarError):
    """The string is not in the language rendered by the grammar."""


def parse(question: str, inflections: InflectionTable,
          automaton: Automaton | None = None) -> QuestionSlots:
    """Invert `render`: recover the slot tuple of a rendered question."""
    text = question.strip()
    if not text.endswith("?"):
        raise ParseError(f"question must end with '?': {question!r}")
    text = text[:-1].strip()
    if not text:
        raise ParseError("empty question")
    text = text[0].lower() + text[1:]
    tokens = text.split(" ")

    preps = automaton.prepositions if automaton else default_prepositions()
    candidates = _parses(tokens, inflections, preps)
    for slots in candidates:
        if nfa_accepts(slots, automaton):
            return slots
    raise ParseError(f"not a question of this grammar: {question!r}")


def _match_multiword(tokens, pos, options):
    """Yield (value, new_pos) for vocabulary items, longest match first."""
    for opt in sorted(options, key=lambda o: -len(o.split())):
        if not opt:
            continue
        words = opt.split(" ")
        if tokens[pos:pos + len(words)] == words:
            yield opt, pos + len(words)


def _parses(tokens, inflections, preps):
    """Yield candidate slot tuples in canonical choice order."""
    n = len(tokens)
    wh_opts = list(_match_multiword(tokens, 0, (
        "how much", "how long", "who", "what", "when", "where", "why", "how")))
    for wh, p0 in wh_opts:
        # aux: present first, then absent
        aux_opts = []
        if p0 < n and tokens[p0] in AUX_VALUES:
            aux_opts.append((tokens[p0], p0 + 1))
        aux_opts.append(("", p0))
        for aux, p1 in aux_opts:
            subj_opts = []
            if p1 < n and tokens[p1] in ("someone", "something"):
                subj_opts.append((tokens[p1], p1 + 1))
            subj_opts.append(("", p1))
            for subj, p2 in subj_opts:
                for chain in _CHAINS_LONGEST_FIRST:
                    words = chain.split(" ") if chain else []
                    p3 = p2 + len(words)
                    if tokens[p2:p3] != words or p3 >= n:
                        continue
                    for form in inflections.forms_of(tokens[p3]):
                        verb = VerbSlot(chain, form) if (chain, form) in _PAIRS else None
                        if verb is None:
                            continue
                        yield from _parse_tail(tokens, p3 + 1, wh, aux, subj,
                                               verb, preps)


def _parse_tail(tokens, pos, wh, aux, subj, verb, preps):
    n = len(tokens)
    obj_opts = []
    if pos < n and tokens[pos] in ("someone", "something"):
        obj_opts.append((tokens[pos], pos + 1))
    obj_opts.append(("", pos))
    for obj, p4 in obj_opts:
        prep_opts = list(_match_multiword(tokens, p4, preps))
        prep_opts.append(("", p4))
        for prep, p5 in prep_opts:
            rest = " ".join(tokens[p5:])
            if rest in MISC_VALUES:
                yield QuestionSlots(wh=wh, aux=aux, subj=subj, verb=verb,
                                    obj=obj, prep=prep, misc=rest)
