"""Verb inflection: a static lexicon plus regular-morphology rules."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path

from .slots import FORM_NAMES

_VOWELS = set("aeiou")


@dataclass(frozen=True)
class InflectionTable:
    """Surface forms of one verb, keyed by form name."""

    stem: str
    present_singular_3rd: str
    present_participle: str
    past: str
    past_participle: str

    _FIELD_BY_FORM = {
        "stem": "stem",
        "presentSingular3rd": "present_singular_3rd",
        "presentParticiple": "present_participle",
        "past": "past",
        "pastParticiple": "past_participle",
    }

    def __post_init__(self):
        for name in FORM_NAMES:
            if not self.surface(name):
                raise ValueError(f"empty inflection form {name!r} for {self.stem!r}")

    def surface(self, form: str) -> str:
        return getattr(self, self._FIELD_BY_FORM[form])

    def forms_of(self, token: str) -> list[str]:
        """All form names whose surface equals `token`, in canonical order."""
        return [f for f in FORM_NAMES if self.surface(f) == token]

    def to_json(self) -> dict:
        return {
            "stem": self.stem,
            "presentSingular3rd": self.present_singular_3rd,
            "presentParticiple": self.present_participle,
            "past": self.past,
            "pastParticiple": self.past_participle,
        }

    @classmethod
    def from_json(cls, d: dict) -> "InflectionTable":
        return cls(d["stem"], d["presentSingular3rd"], d["presentParticiple"],
                   d["past"], d["pastParticiple"])


def load_lexicon(path: str | Path | None = None) -> dict[str, InflectionTable]:
    """Load a TSV lexicon (stem, pres3rd, presPart, past, pastPart per line).

    With no path, loads the small lexicon shipped with the package.
    """
    if path is None:
        text = (importlib.resources.files("qasrl.grammar")
                .joinpath("data/verbs.tsv").read_text(encoding="utf-8"))
    else:
        text = Path(path).read_text(encoding="utf-8")
    lexicon = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 5:
            raise ValueError(f"lexicon line {lineno}: expected 5 tab-separated fields")
        lexicon[parts[0]] = InflectionTable(*parts)
    return lexicon


def _doubles_final_consonant(stem: str) -> bool:
    # Single-syllable C*VC shape, final consonant not w/x/y: stop -> stopping.
    if len(stem) < 3:
        return False
    a, b, c = stem[-3], stem[-2], stem[-1]
    if c in _VOWELS or c in "wxy":
        return False
    if b not in _VOWELS or a in _VOWELS:
        return False
    # Crude monosyllable check: no other vowel cluster before the final CVC.
    head = stem[:-2]
    clusters = 0
    in_vowel = False
    for ch in head:
        if ch in _VOWELS:
            if not in_vowel:
                clusters += 1
            in_vowel = True
        else:
            in_vowel = False
    return clusters <= 1


def regular_inflections(stem: str) -> InflectionTable:
    """Regular-morphology table: s/es, ing with e-drop and doubling, ed."""
    if stem.endswith(("s", "x", "z", "ch", "sh", "o")):
        pres3 = stem + "es"
    elif stem.endswith("y") and len(stem) > 1 and stem[-2] not in _VOWELS:
        pres3 = stem[:-1] + "ies"
    else:
        pres3 = stem + "s"

    if stem.endswith("ie"):
        ing_base = stem[:-2] + "y"
    elif stem.endswith("e") and not stem.endswith("ee"):
        ing_base = stem[:-1]
    elif _doubles_final_consonant(stem):
        ing_base = stem + stem[-1]
    else:
        ing_base = stem
    pres_part = ing_base + "ing"

    if stem.endswith("e"):
        past = stem + "d"
    elif stem.endswith("y") and len(stem) > 1 and stem[-2] not in _VOWELS:
        past = stem[:-1] + "ied"
    elif _doubles_final_consonant(stem):
        past = stem + stem[-1] + "ed"
    else:
        past = stem + "ed"

    return InflectionTable(stem, pres3, pres_part, past, past)


def inflect(stem: str, lexicon: dict[str, InflectionTable] | None = None) -> InflectionTable:
    """Inflection table for `stem`: lexicon entry if present, rules otherwise."""
    if not stem or stem != stem.lower():
        raise ValueError(f"stem must be non-empty lowercase: {stem!r}")
    if lexicon and stem in lexicon:
        return lexicon[stem]
    return regular_inflections(stem)
