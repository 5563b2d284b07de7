"""Grammaticality automaton over the 7 question slots.

Two routes to the same language: `accepts` checks a complete slot tuple
against the constraint table directly, while the automaton machinery
(`advance`, `next_values`) processes slots left to right and supports
autocomplete.  Tests verify the two agree by exhaustive enumeration.

Constraint table (normative here):
  a. the verb slot is mandatory;
  b. empty subj requires wh in {who, what} and a non-do aux;
  c. non-empty subj requires a non-empty aux;
  d. wh outside {who, what} requires a non-empty subj;
  e. aux class fixes the allowed (auxChain, form) pairs;
  f. a passive verb with a non-do misc and no preposition takes no object;
  g. with no preposition, misc "to do something" is expressed as
     prep "to" + misc "do something" instead (keeps rendering injective);
  h. misc "someone"/"something" needs a non-empty obj or prep; a lone
     post-verb noun belongs in the obj slot (same injectivity reason).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .slots import (
    AUX_VALUES,
    DO_MISC,
    GrammarError,
    MISC_VALUES,
    OBJ_VALUES,
    QuestionSlots,
    SUBJ_VALUES,
    VERB_PAIRS,
    VerbSlot,
    WH_VALUES,
    aux_class,
    default_prepositions,
)

WH_ARG = frozenset({"who", "what"})

# (auxChain, form) pairs allowed under each aux class; "none" means empty aux,
# which constraint c restricts to empty-subject questions.
PAIRS_BY_AUX_CLASS = {
    "none": (("", "past"), ("", "presentSingular3rd")),
    "do": (("", "stem"),),
    "be": (("", "presentParticiple"), ("", "pastParticiple"), ("being", "pastParticiple")),
    "have": (("", "pastParticiple"), ("been", "presentParticiple"), ("been", "pastParticiple")),
    "modal": (
        ("", "stem"),
        ("be", "presentParticiple"), ("be", "pastParticiple"),
        ("have", "pastParticiple"),
        ("have been", "presentParticiple"), ("have been", "pastParticiple"),
    ),
}

_PAIRSET_BY_AUX_CLASS = {k: frozenset(v) for k, v in PAIRS_BY_AUX_CLASS.items()}
_ALL_PAIRS = frozenset(VERB_PAIRS)


def verb_voice(aux: str, pair: tuple[str, str]) -> str:
    """active or passive for an (aux, verb pair) combination."""
    chain, form = pair
    if form != "pastParticiple":
        return "active"
    if chain in ("be", "been", "being", "have been"):
        return "passive"
    if chain == "" and aux_class(aux) == "be":
        return "passive"
    return "active"


@dataclass(frozen=True)
class AutomatonState:
    """State after consuming a prefix of the slot sequence."""

    slot_index: int
    wh_is_adjunct: bool
    subject_present: bool
    aux_class: str  # none / do / be / have / modal
    verb_voice: str  # unset / active / passive
    object_present: bool
    prep_present: bool


START_STATE = AutomatonState(0, False, False, "none", "unset", False, False)


class Automaton:
    """The slot automaton for a fixed preposition vocabulary."""

    def __init__(self, prepositions: tuple[str, ...] | None = None):
        preps = tuple(prepositions) if prepositions is not None else default_prepositions()
        self.prepositions = preps
        self._vocab = (
            WH_VALUES,
            AUX_VALUES,
            SUBJ_VALUES,
            VERB_PAIRS,
            OBJ_VALUES,
            ("",) + preps,
            MISC_VALUES,
        )
        self._prep_set = frozenset(preps)
        self._complete_cache: dict[AutomatonState, bool] = {}

    # -- flat predicate ---------------------------------------------------

    def accepts(self, slots: QuestionSlots) -> bool:
        """Constraint-table check of a complete slot tuple."""
        wh, aux, subj, obj, prep, misc = (
            slots.wh, slots.aux, slots.subj, slots.obj, slots.prep, slots.misc)
        self._check_vocab(wh, aux, subj, obj, prep, misc)
        if slots.verb is None:
            return False  # (a)
        pair = (slots.verb.aux_chain, slots.verb.form)
        klass = aux_class(aux)
        if subj == "":
            if wh not in WH_ARG or klass == "do":
                return False  # (b)
        else:
            if aux == "":
                return False  # (c)
        if wh not in WH_ARG and subj == "":
            return False  # (d)
        if pair not in _PAIRSET_BY_AUX_CLASS[klass]:
            return False  # (e)
        voice = verb_voice(aux, pair)
        if voice == "passive" and misc not in DO_MISC and prep == "" and obj != "":
            return False  # (f)
        if prep == "" and misc == "to do something":
            return False  # (g)
        if misc in ("someone", "something") and obj == "" and prep == "":
            return False  # (h)
        return True

    def _check_vocab(self, wh, aux, subj, obj, prep, misc):
        if wh not in WH_VALUES:
            raise GrammarError(f"wh value out of vocabulary: {wh!r}")
        if aux not in AUX_VALUES:
            raise GrammarError(f"aux value out of vocabulary: {aux!r}")
        if subj not in SUBJ_VALUES:
            raise GrammarError(f"subj value out of vocabulary: {subj!r}")
        if obj not in OBJ_VALUES:
            raise GrammarError(f"obj value out of vocabulary: {obj!r}")
        if prep != "" and prep not in self._prep_set:
            raise GrammarError(f"prep value out of vocabulary: {prep!r}")
        if misc not in MISC_VALUES:
            raise GrammarError(f"misc value out of vocabulary: {misc!r}")

    # -- automaton route --------------------------------------------------

    def slot_vocabulary(self, slot_index: int) -> tuple:
        return self._vocab[slot_index]

    def advance(self, state: AutomatonState, value) -> AutomatonState | None:
        """Consume one slot value; None when no accepted tuple can extend it."""
        k = state.slot_index
        if k == 0:
            if value not in WH_VALUES:
                raise GrammarError(f"wh value out of vocabulary: {value!r}")
            return AutomatonState(1, value not in WH_ARG, False, "none",
                                  "unset", False, False)
        if k == 1:
            if value not in AUX_VALUES:
                raise GrammarError(f"aux value out of vocabulary: {value!r}")
            return AutomatonState(2, state.wh_is_adjunct, False,
                                  aux_class(value), "unset", False, False)
        if k == 2:
            if value not in SUBJ_VALUES:
                raise GrammarError(f"subj value out of vocabulary: {value!r}")
            present = value != ""
            if not present:
                if state.wh_is_adjunct or state.aux_class == "do":
                    return None  # (b), (d)
            else:
                if state.aux_class == "none":
                    return None  # (c)
            return AutomatonState(3, state.wh_is_adjunct, present,
                                  state.aux_class, "unset", False, False)
        if k == 3:
            if isinstance(value, VerbSlot):
                pair = (value.aux_chain, value.form)
            else:
                pair = tuple(value)
            if pair not in _ALL_PAIRS:
                raise GrammarError(f"verb pair out of vocabulary: {pair!r}")
            if pair not in _PAIRSET_BY_AUX_CLASS[state.aux_class]:
                return None  # (e)
            # Recover the aux wordedness for voice: class "be" is what matters.
            voice = "passive" if (
                pair[1] == "pastParticiple"
                and (pair[0] in ("be", "been", "being", "have been")
                     or (pair[0] == "" and state.aux_class == "be"))
            ) else "active"
            return AutomatonState(4, state.wh_is_adjunct, state.subject_present,
                                  state.aux_class, voice, False, False)
        if k == 4:
            if value not in OBJ_VALUES:
                raise GrammarError(f"obj value out of vocabulary: {value!r}")
            return AutomatonState(5, state.wh_is_adjunct, state.subject_present,
                                  state.aux_class, state.verb_voice,
                                  value != "", False)
        if k == 5:
            if value != "" and value not in self._prep_set:
                raise GrammarError(f"prep value out of vocabulary: {value!r}")
            return AutomatonState(6, state.wh_is_adjunct, state.subject_present,
                                  state.aux_class, state.verb_voice,
                                  state.object_present, value != "")
        if k == 6:
            if value not in MISC_VALUES:
                raise GrammarError(f"misc value out of vocabulary: {value!r}")
            if (state.verb_voice == "passive" and value not in DO_MISC
                    and not state.prep_present and state.object_present):
                return None  # (f)
            if not state.prep_present and value == "to do something":
                return None  # (g)
            if (value in ("someone", "something") and not state.object_present
                    and not state.prep_present):
                return None  # (h)
            return AutomatonState(7, state.wh_is_adjunct, state.subject_present,
                                  state.aux_class, state.verb_voice,
                                  state.object_present, state.prep_present)
        raise GrammarError("automaton already past the final slot")

    def can_complete(self, state: AutomatonState) -> bool:
        """Whether some assignment of the remaining slots is accepted."""
        if state.slot_index == 7:
            return True
        cached = self._complete_cache.get(state)
        if cached is not None:
            return cached
        ok = False
        for value in self._vocab[state.slot_index]:
            nxt = self.advance(state, value)
            if nxt is not None and self.can_complete(nxt):
                ok = True
                break
        self._complete_cache[state] = ok
        return ok

    def state_for_prefix(self, prefix: list) -> AutomatonState:
        """Run the automaton over a partial slot assignment.

        Raises GrammarError when the prefix is not extendable to any
        accepted tuple.
        """
        if len(prefix) > 7:
            raise GrammarError("prefix longer than 7 slots")
        state = START_STATE
        for value in prefix:
            nxt = self.advance(state, value)
            if nxt is None or not self.can_complete(nxt):
                raise GrammarError(f"unreachable prefix at slot {state.slot_index}: {value!r}")
            state = nxt
        return state

    def next_values(self, prefix: list) -> list:
        """All values for the next slot that keep the prefix completable."""
        state = self.state_for_prefix(prefix)
        if state.slot_index == 7:
            return []
        out = []
        for value in self._vocab[state.slot_index]:
            nxt = self.advance(state, value)
            if nxt is not None and self.can_complete(nxt):
                out.append(value)
        return out

    def enumerate_accepted(self):
        """Yield every accepted slot tuple (automaton route), in vocabulary order."""

        def rec(state, acc):
            if state.slot_index == 7:
                yield tuple(acc)
                return
            for value in self._vocab[state.slot_index]:
                nxt = self.advance(state, value)
                if nxt is not None:
                    acc.append(value)
                    yield from rec(nxt, acc)
                    acc.pop()

        yield from rec(START_STATE, [])


@lru_cache(maxsize=4)
def _default_automaton() -> Automaton:
    return Automaton()


def nfa_accepts(slots: QuestionSlots, automaton: Automaton | None = None) -> bool:
    """True iff the slot tuple satisfies the full constraint table."""
    return (automaton or _default_automaton()).accepts(slots)


def autocomplete(prefix: list, automaton: Automaton | None = None) -> list:
    """Values allowed in the next slot after an NFA-reachable prefix."""
    return (automaton or _default_automaton()).next_values(prefix)
