"""Sentence parsing pipeline: predicates, answer spans, questions.

Three steps per sentence: find verbal predicates from POS tags, detect
answer spans for each predicate with a trained span model, and decode one
question per span.  Spans whose questions come out identical (same slot
tuple) are grouped under a single item, and any decoded question the slot
grammar rejects is dropped into a diagnostics channel rather than emitted.

An item's probability is the smallest span-detector probability among its
grouped spans, which is the supremum of thresholds at which the full item
still appears.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import AnswerSpan, identify_verbs
from .grammar import GrammarError, QuestionSlots, nfa_accepts


def _grammatical(slots: QuestionSlots) -> bool:
    try:
        return nfa_accepts(slots)
    except GrammarError:  # out-of-vocabulary slot values also fail the check
        return False


@dataclass(frozen=True)
class ParseItem:
    """One (predicate, question, answer spans) tuple with its probability."""

    verb_index: int
    slots: QuestionSlots
    spans: frozenset[AnswerSpan]
    prob: float

    def to_json(self, sentence_id: str) -> dict:
        return {
            "sentenceId": sentence_id,
            "verbIndex": self.verb_index,
            "slots": self.slots.to_json(),
            "spans": [[s.start, s.end] for s in sorted(self.spans)],
            "prob": self.prob,
        }


@dataclass
class ParseOutput:
    """Emitted items plus the grammar-rejected ones, kept for diagnostics."""

    items: list[ParseItem]
    dropped: list[ParseItem] = field(default_factory=list)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def dropped_count(self) -> int:
        return len(self.dropped)


def _require_span_model(detector) -> None:
    if detector.mode != "span":
        raise ValueError("parsing needs a span-scoring checkpoint; this one "
                         f"is {detector.mode!r}")


def _candidates(tokens, pos_tags, detector, generator, tau):
    """Ungrouped (verb, question, single span, prob) items above tau."""
    kept, rejected = [], []
    for verb_index in identify_verbs(tokens, pos_tags):
        for scored in detector.score_spans(tokens, verb_index):
            if scored.probability <= tau:
                continue
            slots, _ = generator.generate(tokens, verb_index, scored.span)
            item = ParseItem(verb_index, slots, frozenset((scored.span,)),
                             float(scored.probability))
            if _grammatical(slots):
                kept.append(item)
            else:
                rejected.append(item)
    return kept, rejected


def group_items(items) -> list[ParseItem]:
    """Merge items that decode to the same question for the same verb.

    The merged probability is the minimum over the grouped spans, so the
    grouped item survives exactly the thresholds all its spans survive.
    """
    merged: dict[tuple, ParseItem] = {}
    for item in items:
        key = (item.verb_index, item.slots.astuple())
        prior = merged.get(key)
        if prior is None:
            merged[key] = item
        else:
            merged[key] = ParseItem(item.verb_index, item.slots,
                                    prior.spans | item.spans,
                                    min(prior.prob, item.prob))
    return sorted(merged.values(),
                  key=lambda i: (i.verb_index, -i.prob, i.slots.astuple()))


def _check_tau(tau: float) -> None:
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"threshold must be within [0, 1], got {tau}")


def parse(tokens, pos_tags, detector, generator, tau: float = 0.5) -> ParseOutput:
    """Full pipeline at one span-probability threshold."""
    _check_tau(tau)
    _require_span_model(detector)
    kept, rejected = _candidates(tokens, pos_tags, detector, generator, tau)
    return ParseOutput(group_items(kept), group_items(rejected))


def parse_ranked(tokens, pos_tags, detector, generator,
                 tau_low: float = 0.2) -> ParseOutput:
    """Ungrouped items above a permissive threshold, best first.

    Each item carries a single span, ordered by descending probability, so
    grouping the prefix with probability > tau reproduces parse(..., tau)
    for any tau >= tau_low.
    """
    _check_tau(tau_low)
    _require_span_model(detector)
    kept, rejected = _candidates(tokens, pos_tags, detector, generator, tau_low)
    kept.sort(key=lambda i: (-i.prob, i.verb_index, min(i.spans)))
    return ParseOutput(kept, group_items(rejected))


def cutoff_for_rate(ranked: ParseOutput, verb_count: int,
                    questions_per_verb: float) -> float | None:
    """Probability of the question that brings the ranking to a target rate.

    Walking the ranking best first, distinct questions accumulate; this
    returns the probability of the one at which the average number of
    questions per verb first reaches the target.  Parsing at any threshold
    strictly below the returned value yields at least that rate.  None when
    the ranking never reaches the target.
    """
    if verb_count <= 0:
        raise ValueError("verb count must be positive")
    seen = set()
    for item in ranked:
        seen.add((item.verb_index, item.slots.astuple()))
        if len(seen) / verb_count >= questions_per_verb:
            return item.prob
    return None


def write_predictions(path, outputs) -> None:
    """One JSON line per emitted item; outputs is (sentenceId, ParseOutput)s."""
    with open(path, "w", encoding="utf-8") as fh:
        for sentence_id, output in outputs:
            for item in output:
                fh.write(json.dumps(item.to_json(sentence_id),
                                    ensure_ascii=False))
                fh.write("\n")


def load_predictions(path) -> list[tuple[str, ParseItem]]:
    """Read prediction lines back as (sentenceId, item) pairs."""
    results = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                item = ParseItem(
                    int(d["verbIndex"]),
                    QuestionSlots.from_json(d["slots"]),
                    frozenset(AnswerSpan(int(s), int(e)) for s, e in d["spans"]),
                    float(d["prob"]),
                )
                results.append((d["sentenceId"], item))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"prediction line {number}: {exc}") from exc
    return results
