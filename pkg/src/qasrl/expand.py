"""Dataset expansion by over-generation, filtering, and validated merge.

A recall-tuned parser proposes question/span candidates at a permissive
threshold; candidates that restate existing annotations (answer overlap or
question equality) are filtered out, the rest go to human validation, and
the ones all three validators accept are merged back with an expansion
provenance tag.  Jackknifed folds keep each sentence's candidates coming
from a model that never trained on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .corpus import AnswerSpan, CorpusError, Judgment, QAPair, SentenceRecord
from .grammar import QuestionSlots
from .parser import parse_ranked
from .spandet import ScoredSpan

EXPANSION_RULE = "all-of-3"


@dataclass(frozen=True)
class CandidateQA:
    """A model-proposed question awaiting human validation."""

    sentence_id: str
    verb_index: int
    slots: QuestionSlots
    spans: tuple[ScoredSpan, ...]
    model_id: str = "model"
    fold_id: int | None = None

    def to_json(self) -> dict:
        return {
            "sentenceId": self.sentence_id,
            "verbIndex": self.verb_index,
            "slots": self.slots.to_json(),
            "spans": [[s.span.start, s.span.end, s.probability]
                      for s in self.spans],
            "modelId": self.model_id,
            "foldId": self.fold_id,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CandidateQA":
        return cls(
            sentence_id=d["sentenceId"],
            verb_index=int(d["verbIndex"]),
            slots=QuestionSlots.from_json(d["slots"]),
            spans=tuple(ScoredSpan(AnswerSpan(int(s), int(e)), float(p))
                        for s, e, p in d["spans"]),
            model_id=d.get("modelId", "model"),
            fold_id=d.get("foldId"),
        )


def save_candidates(path, candidates) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for candidate in candidates:
            fh.write(json.dumps(candidate.to_json(), ensure_ascii=False))
            fh.write("\n")


def load_candidates(path) -> list[CandidateQA]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(CandidateQA.from_json(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"candidate line {number}: {exc}") from exc
    return out


def overgenerate(detector, generator, corpus, tau: float = 0.2, *,
                 model_id: str = "model",
                 fold_id: int | None = None) -> list[CandidateQA]:
    """Every grammatical question any span above tau decodes to."""
    candidates = []
    for record in corpus:
        ranked = parse_ranked(record.tokens, record.pos_tags, detector,
                              generator, tau)
        grouped: dict[tuple, list] = {}
        heads: dict[tuple, object] = {}
        order: list[tuple] = []
        for item in ranked:
            key = (item.verb_index, item.slots.astuple())
            if key not in grouped:
                grouped[key] = []
                heads[key] = item
                order.append(key)
            (span,) = item.spans
            grouped[key].append(ScoredSpan(span, item.prob))
        for key in order:
            head = heads[key]
            spans = tuple(sorted(grouped[key], key=lambda s: s.span))
            candidates.append(CandidateQA(record.sentence_id, head.verb_index,
                                          head.slots, spans, model_id,
                                          fold_id))
    return candidates


def _existing_annotations(corpus):
    """Per (sentence, verb): valid answer spans and known slot tuples."""
    spans: dict[tuple, set] = {}
    questions: dict[tuple, set] = {}
    for record in corpus:
        for entry in record.verb_entries:
            key = (record.sentence_id, entry.verb_index)
            spans.setdefault(key, set())
            questions.setdefault(key, set())
            for pair in entry.qa_pairs:
                questions[key].add(pair.slots.astuple())
                for judgment in pair.judgments:
                    if judgment.is_valid:
                        spans[key].update(judgment.spans)
    return spans, questions


def filter_candidates(candidates, corpus) -> list[CandidateQA]:
    """Drop candidates that restate what the corpus already annotates.

    A candidate goes iff any of its spans shares a token with a valid
    answer span already recorded for its verb, or its slot tuple equals an
    existing question's.  Applying the filter twice changes nothing.
    """
    spans_by_verb, questions_by_verb = _existing_annotations(corpus)
    kept = []
    for candidate in candidates:
        key = (candidate.sentence_id, candidate.verb_index)
        if candidate.slots.astuple() in questions_by_verb.get(key, ()):
            continue
        existing = spans_by_verb.get(key, ())
        if any(scored.span.overlaps(old) for scored in candidate.spans
               for old in existing):
            continue
        kept.append(candidate)
    return kept


def jackknife_folds(corpus, k: int = 5, seed: int = 0):
    """Sentence-level (train, heldout) partitions, every sentence out once."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    if len(corpus) < k:
        raise ValueError(f"corpus has {len(corpus)} sentences, fewer than "
                         f"{k} folds")
    order = list(range(len(corpus)))
    np.random.default_rng(seed).shuffle(order)
    folds = [order[i::k] for i in range(k)]
    partitions = []
    for i in range(k):
        heldout_idx = set(folds[i])
        heldout = [corpus[j] for j in sorted(heldout_idx)]
        train = [corpus[j] for j in range(len(corpus)) if j not in heldout_idx]
        partitions.append((train, heldout))
    return partitions


def merge_validated(corpus, judged):
    """Fold validated candidates into the corpus; return (merged, negatives).

    judged holds (candidate, three judgments) pairs.  Unanimously valid
    candidates are appended to their verb entries with an expansion source;
    the rest come back as corpus-shaped negative records.  Pre-existing
    records and pairs are never mutated.
    """
    additions: dict[tuple, list[QAPair]] = {}
    negatives: dict[str, dict[int, list[QAPair]]] = {}
    by_id = {record.sentence_id: record for record in corpus}
    for candidate, judgments in judged:
        judgments = tuple(judgments)
        if len(judgments) != 3:
            raise CorpusError(
                f"candidate for {candidate.sentence_id} has "
                f"{len(judgments)} judgments, expansion validation needs 3")
        if candidate.sentence_id not in by_id:
            raise CorpusError(f"candidate references unknown sentence "
                              f"{candidate.sentence_id!r}")
        record = by_id[candidate.sentence_id]
        if candidate.verb_index not in {e.verb_index
                                        for e in record.verb_entries}:
            raise CorpusError(
                f"candidate references unknown verb {candidate.verb_index} "
                f"in {candidate.sentence_id!r}")
        pair = QAPair(candidate.slots, judgments, "expansion")
        if all(j.is_valid for j in judgments):
            key = (candidate.sentence_id, candidate.verb_index)
            additions.setdefault(key, []).append(pair)
        else:
            negatives.setdefault(candidate.sentence_id, {}) \
                .setdefault(candidate.verb_index, []).append(pair)

    merged = []
    for record in corpus:
        entries = []
        for entry in record.verb_entries:
            extra = additions.get((record.sentence_id, entry.verb_index))
            if extra:
                entry = replace(entry, qa_pairs=entry.qa_pairs + tuple(extra))
            entries.append(entry)
        merged.append(replace(record, verb_entries=tuple(entries)))

    negative_records = []
    for record in corpus:
        per_verb = negatives.get(record.sentence_id)
        if not per_verb:
            continue
        entries = tuple(
            replace(entry, qa_pairs=tuple(per_verb[entry.verb_index]))
            for entry in record.verb_entries
            if entry.verb_index in per_verb)
        negative_records.append(replace(record, verb_entries=entries))
    return merged, negative_records


def _pair_spans(pair: QAPair) -> set:
    return {span for judgment in pair.judgments if judgment.is_valid
            for span in judgment.spans}


def paraphrase_filter(expanded, original) -> list[SentenceRecord]:
    """Drop expansion questions that restate one original question.

    An expansion-sourced question goes iff at least two of its distinct
    answer spans overlap answer spans of a single original question for the
    same verb.  One shared answer is kept: questions often legitimately
    share an argument.
    """
    originals: dict[tuple, list[set]] = {}
    for record in original:
        for entry in record.verb_entries:
            key = (record.sentence_id, entry.verb_index)
            originals[key] = [_pair_spans(pair) for pair in entry.qa_pairs]

    out = []
    for record in expanded:
        entries = []
        for entry in record.verb_entries:
            original_span_sets = originals.get(
                (record.sentence_id, entry.verb_index), [])
            pairs = []
            for pair in entry.qa_pairs:
                if pair.source == "expansion":
                    mine = _pair_spans(pair)
                    restates = any(
                        sum(1 for span in mine
                            if any(span.overlaps(o) for o in theirs)) >= 2
                        for theirs in original_span_sets)
                    if restates:
                        continue
                pairs.append(pair)
            entries.append(replace(entry, qa_pairs=tuple(pairs)))
        out.append(replace(record, verb_entries=tuple(entries)))
    return out
