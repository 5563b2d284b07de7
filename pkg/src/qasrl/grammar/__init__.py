"""The 7-slot question grammar: vocabularies, inflection, automaton,
autocomplete, auto-suggest, and string rendering/parsing."""

from .inflection import InflectionTable, inflect, load_lexicon, regular_inflections
from .nfa import (
    PAIRS_BY_AUX_CLASS,
    Automaton,
    AutomatonState,
    autocomplete,
    nfa_accepts,
    verb_voice,
)
from .slots import (
    AUX_CHAINS,
    AUX_VALUES,
    FORM_NAMES,
    MISC_VALUES,
    NEGATED_AUX,
    OBJ_VALUES,
    SLOT_NAMES,
    SUBJ_VALUES,
    VERB_PAIRS,
    WH_VALUES,
    GrammarError,
    QuestionSlots,
    VerbSlot,
    aux_class,
    default_prepositions,
)
from .suggest import POSITIONS, auto_suggest, extracted_position
from .surface import ParseError, parse, render

__all__ = [
    "AUX_CHAINS", "AUX_VALUES", "FORM_NAMES", "MISC_VALUES", "NEGATED_AUX",
    "OBJ_VALUES", "PAIRS_BY_AUX_CLASS", "POSITIONS", "SLOT_NAMES",
    "SUBJ_VALUES", "VERB_PAIRS", "WH_VALUES",
    "Automaton", "AutomatonState", "GrammarError", "InflectionTable",
    "ParseError", "QuestionSlots", "VerbSlot",
    "auto_suggest", "autocomplete", "aux_class", "default_prepositions",
    "extracted_position", "inflect", "load_lexicon", "nfa_accepts", "parse",
    "regular_inflections", "render", "verb_voice",
]
