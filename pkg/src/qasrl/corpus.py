"""Dataset types, JSONL serialization, verb identification, statistics.

A corpus is a list of sentence records.  Each record carries tokens, POS
tags, and one entry per annotated verb; a verb entry holds question-answer
pairs, each with the judgments collected for it.  Records are immutable
values; loading validates every type invariant and serialization round-trips
byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .grammar import GrammarError, InflectionTable, QuestionSlots, nfa_accepts

DOMAINS = ("wikipedia", "wikinews", "science", "other")
SOURCES = ("generation", "expansion", "parser")


class CorpusError(ValueError):
    """Malformed corpus file or violated record invariant."""


@dataclass(frozen=True, order=True)
class AnswerSpan:
    """Inclusive token-index span (start, end), end >= start."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= self.end):
            raise CorpusError(f"bad span ({self.start}, {self.end})")

    def overlaps(self, other: "AnswerSpan") -> bool:
        return self.start <= other.end and other.start <= self.end

    def to_json(self) -> list:
        return [self.start, self.end]


@dataclass(frozen=True)
class Judgment:
    """One worker's verdict on one question: valid with answer spans, or invalid."""

    worker_id: str
    is_valid: bool
    spans: tuple[AnswerSpan, ...]

    def __post_init__(self):
        if self.is_valid != bool(self.spans):
            raise CorpusError(
                f"worker {self.worker_id}: spans must be non-empty exactly "
                f"when the judgment is valid")

    def to_json(self) -> dict:
        return {"workerId": self.worker_id, "isValid": self.is_valid,
                "spans": [s.to_json() for s in self.spans]}

    @classmethod
    def from_json(cls, d: dict) -> "Judgment":
        return cls(worker_id=d["workerId"], is_valid=bool(d["isValid"]),
                   spans=tuple(AnswerSpan(int(a), int(b)) for a, b in d["spans"]))


@dataclass(frozen=True)
class QAPair:
    """A slot-form question with its judgments and provenance stage."""

    slots: QuestionSlots
    judgments: tuple[Judgment, ...]
    source: str = "generation"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise CorpusError(f"unknown source {self.source!r}")
        if self.source == "generation":
            # The writer's own judgment comes first and always carries spans.
            if not self.judgments or not self.judgments[0].spans:
                raise CorpusError(
                    "generation-sourced question needs the writer's judgment "
                    "with answer spans first")

    def to_json(self) -> dict:
        return {"slots": self.slots.to_json(), "source": self.source,
                "judgments": [j.to_json() for j in self.judgments]}

    @classmethod
    def from_json(cls, d: dict) -> "QAPair":
        return cls(slots=QuestionSlots.from_json(d["slots"]),
                   judgments=tuple(Judgment.from_json(j) for j in d["judgments"]),
                   source=d.get("source", "generation"))


@dataclass(frozen=True)
class VerbEntry:
    """One verbal predicate in a sentence, with its questions."""

    verb_index: int
    inflections: InflectionTable
    qa_pairs: tuple[QAPair, ...]

    def to_json(self) -> dict:
        return {"verbIndex": self.verb_index,
                "inflections": self.inflections.to_json(),
                "qaPairs": [q.to_json() for q in self.qa_pairs]}

    @classmethod
    def from_json(cls, d: dict) -> "VerbEntry":
        return cls(verb_index=int(d["verbIndex"]),
                   inflections=InflectionTable.from_json(d["inflections"]),
                   qa_pairs=tuple(QAPair.from_json(q) for q in d["qaPairs"]))


@dataclass(frozen=True)
class SentenceRecord:
    """One sentence with POS tags and per-verb question-answer annotations."""

    sentence_id: str
    domain: str
    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...]
    verb_entries: tuple[VerbEntry, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        """Raise CorpusError naming this sentence on any invariant violation."""
        sid = self.sentence_id
        if self.domain not in DOMAINS:
            raise CorpusError(f"{sid}: unknown domain {self.domain!r}")
        n = len(self.tokens)
        if n == 0:
            raise CorpusError(f"{sid}: empty token list")
        if len(self.pos_tags) != n:
            raise CorpusError(f"{sid}: {len(self.pos_tags)} tags for {n} tokens")
        indices = [e.verb_index for e in self.verb_entries]
        if indices != sorted(set(indices)):
            raise CorpusError(f"{sid}: verb indices not strictly increasing")
        for entry in self.verb_entries:
            v = entry.verb_index
            if not 0 <= v < n:
                raise CorpusError(f"{sid}: verb index {v} out of range")
            if not self.pos_tags[v].startswith("VB"):
                raise CorpusError(f"{sid}: token {v} tagged {self.pos_tags[v]}, not VB*")
            self._validate_entry(entry)

    def _validate_entry(self, entry: VerbEntry) -> None:
        sid = self.sentence_id
        last = len(self.tokens) - 1
        by_worker: dict[str, list[tuple[int, AnswerSpan]]] = {}
        for qi, pair in enumerate(entry.qa_pairs):
            try:
                ok = nfa_accepts(pair.slots)
            except GrammarError as exc:
                raise CorpusError(f"{sid}: verb {entry.verb_index}: {exc}") from exc
            if not ok:
                raise CorpusError(
                    f"{sid}: verb {entry.verb_index}: question slots rejected "
                    f"by the grammar: {pair.slots.to_json()}")
            for j in pair.judgments:
                for span in j.spans:
                    if span.end > last:
                        raise CorpusError(
                            f"{sid}: span ({span.start}, {span.end}) beyond "
                            f"final token {last}")
                    by_worker.setdefault(j.worker_id, []).append((qi, span))
        # Per worker, spans given to distinct questions of one verb must not
        # overlap; spans inside one answer set may.
        for worker, spans in by_worker.items():
            for i, (qi, a) in enumerate(spans):
                for qj, b in spans[i + 1:]:
                    if qi != qj and a.overlaps(b):
                        raise CorpusError(
                            f"{sid}: worker {worker} gave overlapping spans "
                            f"({a.start},{a.end}) and ({b.start},{b.end}) to "
                            f"distinct questions of verb {entry.verb_index}")

    def to_json(self) -> dict:
        return {"sentenceId": self.sentence_id, "domain": self.domain,
                "tokens": list(self.tokens), "posTags": list(self.pos_tags),
                "verbEntries": [e.to_json() for e in self.verb_entries]}

    @classmethod
    def from_json(cls, d: dict) -> "SentenceRecord":
        return cls(sentence_id=d["sentenceId"], domain=d["domain"],
                   tokens=tuple(d["tokens"]), pos_tags=tuple(d["posTags"]),
                   verb_entries=tuple(VerbEntry.from_json(e)
                                      for e in d["verbEntries"]))


# -- serialization --------------------------------------------------------


def record_to_line(record: SentenceRecord) -> str:
    return json.dumps(record.to_json(), ensure_ascii=False)


def save_corpus(corpus: list[SentenceRecord], path) -> None:
    """Write one JSON object per line, schema-ordered keys."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in corpus:
            fh.write(record_to_line(record))
            fh.write("\n")


def load_corpus(path, validate: bool = True) -> list[SentenceRecord]:
    """Read a JSONL corpus file; every record invariant is checked.

    Parse failures report the 1-based line number; invariant violations
    report the sentence id.
    """
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            try:
                record = SentenceRecord.from_json(d)
                if validate:
                    record.validate()
            except CorpusError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            out.append(record)
    return out


# -- validity aggregation -------------------------------------------------

_RULE_RE = re.compile(r"^(all|\d+)-of-(\d+)$")

# Aggregation rule per provenance stage.  Generation questions carry the
# writer's own judgment first; the rule applies to the validators after it.
STAGE_RULES = {"generation": "all-of-2", "expansion": "all-of-3",
               "parser": "all-of-1"}


def parse_rule(rule: str) -> tuple[int, int]:
    """Turn "all-of-n" / "k-of-n" into (k, n)."""
    m = _RULE_RE.match(rule)
    if not m:
        raise ValueError(f"bad aggregation rule {rule!r}")
    n = int(m.group(2))
    k = n if m.group(1) == "all" else int(m.group(1))
    if not 0 < k <= n:
        raise ValueError(f"bad aggregation rule {rule!r}")
    return k, n


def aggregate_validity(judgments, rule: str) -> bool:
    """Whether the judgments make the question valid under a k-of-n rule."""
    k, n = parse_rule(rule)
    items = list(judgments)
    if len(items) < n:
        raise ValueError(f"rule {rule!r} needs {n} judgments, got {len(items)}")
    return sum(1 for j in items if j.is_valid) >= k


def validator_judgments(pair: QAPair):
    """The judgments the stage rule applies to (writer's own excluded)."""
    if pair.source == "generation":
        return pair.judgments[1:]
    return pair.judgments


def question_is_valid(pair: QAPair, rules: dict | None = None) -> bool:
    """Validity of one question under its stage's aggregation rule.

    A question whose validation is still incomplete counts as not valid.
    """
    rule = (rules or STAGE_RULES)[pair.source]
    items = validator_judgments(pair)
    k, n = parse_rule(rule)
    if len(items) < n:
        return False
    return sum(1 for j in items if j.is_valid) >= k


# -- statistics -----------------------------------------------------------


@dataclass(frozen=True)
class CorpusStats:
    """Counts for one corpus or one domain slice."""

    sentences: int
    verbs: int
    questions: int
    valid_questions: int
    by_domain: dict = field(default_factory=dict)

    @property
    def valid_per_verb(self) -> float:
        return self.valid_questions / self.verbs if self.verbs else 0.0

    @property
    def valid_per_sentence(self) -> float:
        return self.valid_questions / self.sentences if self.sentences else 0.0

    def to_json(self) -> dict:
        d = {"sentences": self.sentences, "verbs": self.verbs,
             "questions": self.questions, "validQuestions": self.valid_questions,
             "validPerVerb": round(self.valid_per_verb, 4),
             "validPerSentence": round(self.valid_per_sentence, 4)}
        if self.by_domain:
            d["byDomain"] = {k: v.to_json() for k, v in self.by_domain.items()}
        return d


def corpus_stats(corpus: list[SentenceRecord],
                 rules: dict | None = None) -> CorpusStats:
    """Sentence/verb/question counts, overall and per domain."""

    def tally(records):
        sentences = len(records)
        verbs = questions = valid = 0
        for rec in records:
            for entry in rec.verb_entries:
                verbs += 1
                for pair in entry.qa_pairs:
                    questions += 1
                    if question_is_valid(pair, rules):
                        valid += 1
        return sentences, verbs, questions, valid

    by_domain = {}
    for domain in DOMAINS:
        records = [r for r in corpus if r.domain == domain]
        if records:
            by_domain[domain] = CorpusStats(*tally(records))
    return CorpusStats(*tally(corpus), by_domain=by_domain)


# -- verb identification --------------------------------------------------

BE_FORMS = frozenset({"be", "am", "is", "are", "was", "were", "been", "being",
                      "'s", "'re", "'m"})
HAVE_FORMS = frozenset({"have", "has", "had", "'ve", "'d"})
DO_FORMS = frozenset({"do", "does", "did"})
_FINAL_PUNCT = frozenset({".", "!", "?"})


def identify_verbs(tokens, pos_tags) -> list[int]:
    """Token indices of main verbal predicates.

    Keeps VB*-tagged tokens, drops "be" forms and modals outright, and drops
    "have"/"do" forms when used as auxiliaries: a form counts as auxiliary
    when the next VB*-tagged token before sentence-final punctuation is a
    past participle (for have) or a bare stem (for do).
    """
    if len(tokens) != len(pos_tags):
        raise ValueError(f"{len(tokens)} tokens but {len(pos_tags)} tags")

    def next_verb_tag(i):
        for j in range(i + 1, len(tokens)):
            if pos_tags[j] in _FINAL_PUNCT or tokens[j] in _FINAL_PUNCT:
                return None
            if pos_tags[j].startswith("VB"):
                return pos_tags[j]
        return None

    out = []
    for i, (token, tag) in enumerate(zip(tokens, pos_tags)):
        if not tag.startswith("VB"):
            continue
        word = token.lower()
        if word in BE_FORMS:
            continue
        if word in HAVE_FORMS and next_verb_tag(i) == "VBN":
            continue
        if word in DO_FORMS and next_verb_tag(i) == "VB":
            continue
        out.append(i)
    return out


# -- demo-quality text handling -------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+|[^\sA-Za-z0-9]")

_CLOSED_CLASS = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "that": "DT",
    "these": "DT", "those": "DT",
    "i": "PRP", "you": "PRP", "he": "PRP", "she": "PRP", "it": "PRP",
    "we": "PRP", "they": "PRP", "him": "PRP", "her": "PRP", "them": "PRP",
    "his": "PRP$", "their": "PRP$", "its": "PRP$", "my": "PRP$", "our": "PRP$",
    "and": "CC", "or": "CC", "but": "CC",
    "in": "IN", "on": "IN", "at": "IN", "to": "TO", "of": "IN", "for": "IN",
    "with": "IN", "from": "IN", "by": "IN", "about": "IN", "into": "IN",
    "not": "RB", "never": "RB", "also": "RB",
    "can": "MD", "could": "MD", "may": "MD", "might": "MD", "must": "MD",
    "shall": "MD", "should": "MD", "will": "MD", "would": "MD",
    "be": "VB", "am": "VBP", "is": "VBZ", "are": "VBP", "was": "VBD",
    "were": "VBD", "been": "VBN", "being": "VBG",
    "have": "VBP", "has": "VBZ", "had": "VBD",
    "do": "VBP", "does": "VBZ", "did": "VBD",
}


def naive_tokenize(text: str) -> list[str]:
    """Whitespace-and-punctuation splitter.  Demo quality only."""
    return _TOKEN_RE.findall(text)


def naive_pos_tags(tokens) -> list[str]:
    """Tiny rule tagger for demos.  Low quality; real input needs real tags."""
    tags = []
    for i, token in enumerate(tokens):
        word = token.lower()
        if not token[0].isalnum() and len(token) == 1:
            tags.append(token if token in ".,:" else "SYM")
        elif word in _CLOSED_CLASS:
            tags.append(_CLOSED_CLASS[word])
        elif token[0].isdigit():
            tags.append("CD")
        elif i > 0 and token[0].isupper():
            tags.append("NNP")
        elif word.endswith("ing"):
            tags.append("VBG")
        elif word.endswith("ed"):
            tags.append("VBD")
        elif word.endswith("ly"):
            tags.append("RB")
        elif word.endswith("s") and not word.endswith("ss"):
            tags.append("NNS")
        else:
            tags.append("NN")
    return tags
