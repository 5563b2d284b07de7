"""Evaluation: span matching, PRF with bipartite-matching recall, question
accuracy, joint metrics, agreement statistics, and ranked accuracy curves.

All functions are pure and operate on plain corpus values; a maximum
bipartite matching between predicted spans and gold questions gives the
recall its best-case interpretation.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .corpus import AnswerSpan


@dataclass(frozen=True)
class Matcher:
    """Span equivalence test: exact equality or intersection-over-union."""

    kind: str = "exact"
    iou_threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in ("exact", "iou"):
            raise ValueError(f"unknown matcher kind {self.kind!r}")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou threshold {self.iou_threshold} outside (0, 1]")


EXACT = Matcher("exact")
IOU = Matcher("iou", 0.5)


def span_iou(a: AnswerSpan, b: AnswerSpan) -> float:
    inter = min(a.end, b.end) - max(a.start, b.start) + 1
    if inter <= 0:
        return 0.0
    union = (a.end - a.start + 1) + (b.end - b.start + 1) - inter
    return inter / union


def span_match(a: AnswerSpan, b: AnswerSpan, matcher: Matcher = EXACT) -> bool:
    if matcher.kind == "exact":
        return a == b
    return span_iou(a, b) >= matcher.iou_threshold


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_rates(cls, precision: float, recall: float) -> "PRF":
        if precision + recall == 0.0:
            return cls(precision, recall, 0.0)
        return cls(precision, recall,
                   2 * precision * recall / (precision + recall))

    def to_json(self) -> dict:
        return {"precision": round(self.precision, 6),
                "recall": round(self.recall, 6), "f1": round(self.f1, 6)}


def _matching_size(edges: np.ndarray) -> int:
    """Cardinality of a maximum matching given a boolean biadjacency matrix."""
    if edges.size == 0 or not edges.any():
        return 0
    graph = csr_matrix(edges)
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int((match >= 0).sum())


def span_detection_prf(predicted, gold_questions, matcher: Matcher = EXACT) -> PRF:
    """Precision over predicted spans, matching-based recall over questions.

    `gold_questions` is one span collection per gold question.  A predicted
    span is precise when it matches any gold answer span; recall is the size
    of a maximum matching between predictions and questions (an edge wherever
    the prediction matches one of the question's spans) over the question
    count.  With no predictions, precision is vacuously 1.
    """
    predicted = list(predicted)
    gold_questions = [list(spans) for spans in gold_questions]
    if not predicted:
        return PRF.from_rates(1.0, 0.0 if gold_questions else 1.0)
    edges = np.zeros((len(predicted), max(len(gold_questions), 1)), dtype=bool)
    for i, span in enumerate(predicted):
        for j, spans in enumerate(gold_questions):
            if any(span_match(span, g, matcher) for g in spans):
                edges[i, j] = True
    matched_preds = sum(1 for i in range(len(predicted)) if edges[i].any())
    precision = matched_preds / len(predicted)
    if not gold_questions:
        return PRF.from_rates(precision, 1.0)
    recall = _matching_size(edges) / len(gold_questions)
    return PRF.from_rates(precision, recall)


def span_detection_prf_micro(instances, matcher: Matcher = EXACT) -> PRF:
    """Dataset-level PRF pooling counts over (predicted, gold) verb instances."""
    pred_total = pred_matched = gold_total = gold_matched = 0
    for predicted, gold_questions in instances:
        predicted = list(predicted)
        gold_questions = [list(spans) for spans in gold_questions]
        pred_total += len(predicted)
        gold_total += len(gold_questions)
        if not predicted or not gold_questions:
            continue
        edges = np.zeros((len(predicted), len(gold_questions)), dtype=bool)
        for i, span in enumerate(predicted):
            for j, spans in enumerate(gold_questions):
                if any(span_match(span, g, matcher) for g in spans):
                    edges[i, j] = True
        pred_matched += sum(1 for i in range(len(predicted)) if edges[i].any())
        gold_matched += _matching_size(edges)
    precision = pred_matched / pred_total if pred_total else 1.0
    recall = gold_matched / gold_total if gold_total else 1.0
    return PRF.from_rates(precision, recall)


# question accuracy -------------------------------------------------------

_PM_SLOTS = (0, 2, 4, 6)  # wh, subj, obj, misc positions in astuple order


def question_accuracy(predicted_slots, gold_slots) -> tuple[int, int, float]:
    """(exact match, partial match, slot accuracy) for one question pair.

    Partial match compares the wh, subject, object, and miscellaneous slots
    only; slot accuracy is the fraction of the 7 slots predicted exactly.
    """
    p = predicted_slots.astuple()
    g = gold_slots.astuple()
    equal = [p[i] == g[i] for i in range(7)]
    em = int(all(equal))
    pm = int(all(equal[i] for i in _PM_SLOTS))
    return em, pm, sum(equal) / 7.0


def joint_prf(predicted_items, gold_pairs) -> PRF:
    """Exact-match joint metric over (question, span) items.

    An item is correct against a gold pair when the slot tuples are equal
    and the gold pair's answer spans contain the item's span; recall uses a
    maximum matching over correct edges.
    """
    predicted_items = list(predicted_items)
    gold_pairs = [(slots, set(spans)) for slots, spans in gold_pairs]
    if not predicted_items:
        return PRF.from_rates(1.0, 0.0 if gold_pairs else 1.0)
    edges = np.zeros((len(predicted_items), max(len(gold_pairs), 1)), dtype=bool)
    for i, (slots, span) in enumerate(predicted_items):
        for j, (gold_slots, gold_spans) in enumerate(gold_pairs):
            if slots == gold_slots and span in gold_spans:
                edges[i, j] = True
    correct = sum(1 for i in range(len(predicted_items)) if edges[i].any())
    precision = correct / len(predicted_items)
    if not gold_pairs:
        return PRF.from_rates(precision, 1.0)
    recall = _matching_size(edges) / len(gold_pairs)
    return PRF.from_rates(precision, recall)


def joint_prf_micro(instances) -> PRF:
    """Dataset-level joint PRF pooling counts over (items, gold pairs) verbs.

    Matching stays within each verb; identical questions about different
    verbs never satisfy one another.
    """
    pred_total = pred_matched = gold_total = gold_matched = 0
    for predicted_items, gold_pairs in instances:
        predicted_items = list(predicted_items)
        gold_pairs = [(slots, set(spans)) for slots, spans in gold_pairs]
        pred_total += len(predicted_items)
        gold_total += len(gold_pairs)
        if not predicted_items or not gold_pairs:
            continue
        edges = np.zeros((len(predicted_items), len(gold_pairs)), dtype=bool)
        for i, (slots, span) in enumerate(predicted_items):
            for j, (gold_slots, gold_spans) in enumerate(gold_pairs):
                if slots == gold_slots and span in gold_spans:
                    edges[i, j] = True
        pred_matched += sum(1 for i in range(len(predicted_items))
                            if edges[i].any())
        gold_matched += _matching_size(edges)
    precision = pred_matched / pred_total if pred_total else 1.0
    recall = gold_matched / gold_total if gold_total else 1.0
    return PRF.from_rates(precision, recall)


# agreement ---------------------------------------------------------------


def agreement_kappa(valid_rate: float, observed_agreement: float) -> float:
    """Chance-corrected agreement from a validity rate and raw agreement.

    Chance agreement is p^2 + (1-p)^2 for validity rate p; degenerate
    inputs (chance agreement of 1) are rejected.
    """
    if not 0.0 <= valid_rate <= 1.0:
        raise ValueError(f"valid rate {valid_rate} outside [0, 1]")
    if not 0.0 <= observed_agreement <= 1.0:
        raise ValueError(f"agreement {observed_agreement} outside [0, 1]")
    chance = valid_rate ** 2 + (1.0 - valid_rate) ** 2
    if chance == 1.0:
        raise ValueError("degenerate rates: chance agreement is 1")
    return (observed_agreement - chance) / (1.0 - chance)


def fleiss_kappa(counts) -> float:
    """Fleiss kappa from an items-by-categories judgment count matrix."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 2 or counts.shape[0] == 0:
        raise ValueError("need a non-empty items-by-categories matrix")
    raters = counts.sum(axis=1)
    n = raters[0]
    if n < 2 or not np.all(raters == n):
        raise ValueError("every item needs the same rater count (at least 2)")
    p_item = ((counts * (counts - 1)).sum(axis=1)) / (n * (n - 1))
    p_bar = p_item.mean()
    p_cat = counts.sum(axis=0) / counts.sum()
    chance = float((p_cat ** 2).sum())
    if chance == 1.0:
        raise ValueError("degenerate judgment matrix: chance agreement is 1")
    return float((p_bar - chance) / (1.0 - chance))


def span_agreement_rate(questions) -> float:
    """Fraction of answer spans exactly matching another annotator's span.

    `questions` holds, per question, the per-annotator span collections:
    an iterable of (annotator id, spans) pairs.
    """
    total = matched = 0
    for annotator_spans in questions:
        pairs = [(worker, set(spans)) for worker, spans in annotator_spans]
        for worker, spans in pairs:
            for span in spans:
                total += 1
                if any(span in other for w, other in pairs if w != worker):
                    matched += 1
    return matched / total if total else 0.0


# human evaluation curves -------------------------------------------------


@dataclass(frozen=True)
class JudgedPrediction:
    """One ranked parser output plus its human judgments."""

    prob: float
    judgments: tuple[bool, ...]
    span_matched: bool  # predicted span among validator-provided spans


@dataclass(frozen=True)
class CurvePoint:
    questions_per_verb: float
    question_accuracy: float
    span_accuracy: float

    def to_json(self) -> dict:
        return {"questionsPerVerb": round(self.questions_per_verb, 6),
                "questionAccuracy": round(self.question_accuracy, 6),
                "spanAccuracy": round(self.span_accuracy, 6)}


def human_eval_curves(items, verbs_count: int, rule: str = "5-of-6"
                      ) -> list[CurvePoint]:
    """Accuracy over ranked prefixes of judged predictions.

    A question is correct when enough judges call it valid per `rule`; its
    span is correct only if the question is and the predicted span matched
    validator answers.  One curve point per prefix length.
    """
    from .corpus import parse_rule

    k, n = parse_rule(rule)
    items = sorted(items, key=lambda it: -it.prob)
    if verbs_count <= 0:
        raise ValueError("verbs count must be positive")
    points = []
    good_q = good_s = 0
    for rank, item in enumerate(items, start=1):
        if len(item.judgments) < n:
            raise ValueError(
                f"item at rank {rank} has {len(item.judgments)} judgments, "
                f"rule {rule} needs {n}")
        correct = sum(item.judgments) >= k
        good_q += int(correct)
        good_s += int(correct and item.span_matched)
        points.append(CurvePoint(rank / verbs_count, good_q / rank, good_s / rank))
    return points


def curves_csv(points) -> str:
    out = io.StringIO()
    out.write("questions_per_verb,question_accuracy,span_accuracy\n")
    for p in points:
        out.write(f"{p.questions_per_verb:.6f},{p.question_accuracy:.6f},"
                  f"{p.span_accuracy:.6f}\n")
    return out.getvalue()
