"""Slot vocabularies and the 7-slot question representation.

A question is a tuple of seven slots in fixed order: wh, aux, subj, verb,
obj, prep, misc.  The verb slot is abstract: an auxiliary chain plus an
inflection-form name, so that questions are independent of the particular
verb.  Empty slots are the empty string.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass


class GrammarError(ValueError):
    """A slot value outside its vocabulary, or an unusable slot tuple."""


WH_VALUES = ("who", "what", "when", "where", "why", "how", "how much", "how long")

_AUX_BASE = (
    "is", "are", "was", "were",
    "do", "does", "did",
    "has", "have", "had",
    "can", "could", "may", "might", "must", "should", "shall", "will", "would",
)

_NEGATIONS = {
    "is": "isn't", "are": "aren't", "was": "wasn't", "were": "weren't",
    "do": "don't", "does": "doesn't", "did": "didn't",
    "has": "hasn't", "have": "haven't", "had": "hadn't",
    "can": "can't", "could": "couldn't", "may": "mayn't", "might": "mightn't",
    "must": "mustn't", "should": "shouldn't", "shall": "shan't",
    "will": "won't", "would": "wouldn't",
}

AUX_VALUES = ("",) + _AUX_BASE + tuple(_NEGATIONS[a] for a in _AUX_BASE)

NEGATED_AUX = frozenset(_NEGATIONS.values())

BE_AUX = frozenset({"is", "are", "was", "were"} | {_NEGATIONS[a] for a in ("is", "are", "was", "were")})
DO_AUX = frozenset({"do", "does", "did"} | {_NEGATIONS[a] for a in ("do", "does", "did")})
HAVE_AUX = frozenset({"has", "have", "had"} | {_NEGATIONS[a] for a in ("has", "have", "had")})
MODAL_AUX = frozenset(set(_AUX_BASE[10:]) | {_NEGATIONS[a] for a in _AUX_BASE[10:]})

SUBJ_VALUES = ("", "someone", "something")
OBJ_VALUES = ("", "someone", "something")

MISC_VALUES = (
    "", "someone", "something", "somewhere",
    "do something", "doing something", "be doing something", "to do something",
)

DO_MISC = frozenset({"do something", "doing something", "be doing something", "to do something"})

FORM_NAMES = ("stem", "presentSingular3rd", "presentParticiple", "past", "pastParticiple")

AUX_CHAINS = ("", "be", "been", "being", "have", "have been")

# Allowed (auxChain, form) pairs for the verb slot.  Everything else is
# unusable regardless of the other slots.
VERB_PAIRS = (
    ("", "stem"),
    ("", "presentSingular3rd"),
    ("", "presentParticiple"),
    ("", "past"),
    ("", "pastParticiple"),
    ("be", "presentParticiple"),
    ("be", "pastParticiple"),
    ("been", "presentParticiple"),
    ("been", "pastParticiple"),
    ("being", "pastParticiple"),
    ("have", "pastParticiple"),
    ("have been", "presentParticiple"),
    ("have been", "pastParticiple"),
)

_VERB_PAIR_SET = frozenset(VERB_PAIRS)


def aux_class(aux: str) -> str:
    """Classify an aux-slot value as none, do, be, have, or modal."""
    if aux == "":
        return "none"
    if aux in DO_AUX:
        return "do"
    if aux in BE_AUX:
        return "be"
    if aux in HAVE_AUX:
        return "have"
    if aux in MODAL_AUX:
        return "modal"
    raise GrammarError(f"unknown aux value: {aux!r}")


def default_prepositions() -> tuple[str, ...]:
    """The shipped 40-item preposition vocabulary."""
    text = (
        importlib.resources.files("qasrl.grammar")
        .joinpath("data/prepositions.txt")
        .read_text(encoding="utf-8")
    )
    preps = tuple(line.strip() for line in text.splitlines() if line.strip())
    return preps


@dataclass(frozen=True)
class VerbSlot:
    """Abstract verb slot: auxiliary chain plus inflection-form name."""

    aux_chain: str
    form: str

    def __post_init__(self):
        if (self.aux_chain, self.form) not in _VERB_PAIR_SET:
            raise GrammarError(
                f"verb slot combination not allowed: ({self.aux_chain!r}, {self.form!r})"
            )


@dataclass(frozen=True)
class QuestionSlots:
    """One question in slot form.  Empty slots are empty strings."""

    wh: str
    aux: str
    subj: str
    verb: VerbSlot | None
    obj: str
    prep: str
    misc: str

    def astuple(self) -> tuple:
        v = ("", "") if self.verb is None else (self.verb.aux_chain, self.verb.form)
        return (self.wh, self.aux, self.subj, v, self.obj, self.prep, self.misc)

    def to_json(self) -> dict:
        return {
            "wh": self.wh,
            "aux": self.aux,
            "subj": self.subj,
            "verbForm": self.verb.form if self.verb else "",
            "auxChain": self.verb.aux_chain if self.verb else "",
            "obj": self.obj,
            "prep": self.prep,
            "misc": self.misc,
        }

    @classmethod
    def from_json(cls, d: dict) -> "QuestionSlots":
        form = d.get("verbForm", "")
        verb = VerbSlot(d.get("auxChain", ""), form) if form else None
        return cls(
            wh=d["wh"], aux=d.get("aux", ""), subj=d.get("subj", ""),
            verb=verb, obj=d.get("obj", ""), prep=d.get("prep", ""),
            misc=d.get("misc", ""),
        )


SLOT_NAMES = ("wh", "aux", "subj", "verb", "obj", "prep", "misc")
