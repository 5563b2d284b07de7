"""Unlabeled answer-span detection for a marked predicate.

Two interchangeable models: a BIO tagger decoded with constrained Viterbi,
and a per-span scorer that sigmoids every (i, j) pair and keeps those above
a threshold.  Both read the shared sentence encoder's output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .corpus import AnswerSpan, question_is_valid
from .metrics import EXACT, Matcher, span_detection_prf_micro
from .nn import ParameterSet
from .training import TrainingHistory, train_loop

TAGS = ("B", "I", "O")
TAG_INDEX = {t: i for i, t in enumerate(TAGS)}

# Reconstruction preference on score ties, and the transition constraint:
# I may only continue a span started by B.
_TIE_ORDER = ("O", "B", "I")
_ALLOWED_AFTER = {None: ("B", "O"), "B": TAGS, "I": TAGS, "O": ("B", "O")}


@dataclass
class TagSequence:
    """Decoded tags plus the per-token log-probability table."""

    tags: tuple
    log_probs: np.ndarray

    def __len__(self):
        return len(self.tags)


@dataclass(frozen=True)
class ScoredSpan:
    span: AnswerSpan
    probability: float


# -- BIO route ------------------------------------------------------------


def bio_scores(encoded, params: ParameterSet, prefix: str = "bio"):
    """Per-token distributions over B/I/O, on the tape."""
    return [nn.softmax(nn.mlp(h, params, prefix)) for h in encoded.vectors]


def bio_log_scores(encoded, params: ParameterSet, prefix: str = "bio"):
    return [nn.log_softmax(nn.mlp(h, params, prefix)) for h in encoded.vectors]


def viterbi_decode(distributions) -> TagSequence:
    """Highest-scoring tag sequence under the BIO transition constraints.

    Ties resolve toward O, then B, position by position.
    """
    probs = np.asarray([d.value if hasattr(d, "value") else d
                        for d in distributions], dtype=np.float64)
    with np.errstate(divide="ignore"):
        logp = np.log(probs)
    n = len(logp)
    # suffix[i][prev] = best total of positions i.. given the previous tag.
    suffix = [dict() for _ in range(n + 1)]
    for prev in (None, "B", "I", "O"):
        suffix[n][prev] = 0.0
    for i in range(n - 1, -1, -1):
        for prev in (None, "B", "I", "O"):
            suffix[i][prev] = max(logp[i][TAG_INDEX[t]] + suffix[i + 1][t]
                                  for t in _ALLOWED_AFTER[prev])
    tags = []
    prev = None
    for i in range(n):
        target = suffix[i][prev]
        for t in _TIE_ORDER:
            if t not in _ALLOWED_AFTER[prev]:
                continue
            if logp[i][TAG_INDEX[t]] + suffix[i + 1][t] == target:
                tags.append(t)
                prev = t
                break
    return TagSequence(tags=tuple(tags), log_probs=logp)


def tags_to_spans(tags) -> set:
    """Maximal B I* runs as inclusive spans."""
    if isinstance(tags, TagSequence):
        tags = tags.tags
    spans = set()
    start = None
    for i, tag in enumerate(tags):
        if tag == "B":
            if start is not None:
                spans.add(AnswerSpan(start, i - 1))
            start = i
        elif tag == "I":
            if start is None:
                raise ValueError(f"I at position {i} continues nothing")
        else:
            if start is not None:
                spans.add(AnswerSpan(start, i - 1))
                start = None
    if start is not None:
        spans.add(AnswerSpan(start, len(tags) - 1))
    return spans


def spans_to_tags(spans, length: int) -> tuple:
    """Inverse of tags_to_spans; requires pairwise non-overlapping spans."""
    spans = sorted(spans)
    for a, b in zip(spans, spans[1:]):
        if a.overlaps(b):
            raise ValueError(f"overlapping spans ({a.start},{a.end}) and "
                             f"({b.start},{b.end})")
    tags = ["O"] * length
    for span in spans:
        if span.end >= length:
            raise ValueError(f"span ({span.start},{span.end}) beyond length {length}")
        tags[span.start] = "B"
        for i in range(span.start + 1, span.end + 1):
            tags[i] = "I"
    return tuple(tags)


# -- span-scorer route ----------------------------------------------------


def span_logits(encoded, params: ParameterSet, prefix: str = "span"):
    """Tape logit for every (i, j) pair, i ≤ j, keyed by the pair."""
    out = {}
    vectors = encoded.vectors
    for i in range(len(vectors)):
        for j in range(i, len(vectors)):
            rep = nn.concat([vectors[i], vectors[j]])
            out[(i, j)] = nn.mlp(rep, params, prefix)[0]
    return out


def span_probabilities(encoded, params: ParameterSet,
                       prefix: str = "span") -> list:
    """All (n+1)(n+2)/2 spans with sigmoid probabilities, in index order."""
    return [ScoredSpan(AnswerSpan(i, j), float(nn.sigmoid(logit).value))
            for (i, j), logit in span_logits(encoded, params, prefix).items()]


def select_spans(scored, tau: float) -> set:
    """Spans scored strictly above the threshold; overlaps permitted."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"threshold {tau} outside [0, 1]")
    return {s.span for s in scored if s.probability > tau}


# -- gold-label helpers ---------------------------------------------------


def gold_question_spans(entry, rules=None) -> list:
    """Per valid question, the union of its judged answer spans."""
    out = []
    for pair in entry.qa_pairs:
        if question_is_valid(pair, rules):
            spans = {s for j in pair.judgments for s in j.spans}
            if spans:
                out.append(spans)
    return out


def gold_answer_spans(entry, rules=None) -> set:
    """All answer spans of all valid questions of one verb."""
    return {s for spans in gold_question_spans(entry, rules) for s in spans}


def bio_projection(spans) -> list:
    """Canonical non-overlapping subset: earliest start, then longest, wins."""
    chosen = []
    for span in sorted(spans, key=lambda s: (s.start, -(s.end - s.start))):
        if not any(span.overlaps(c) for c in chosen):
            chosen.append(span)
    return chosen


# -- model object ---------------------------------------------------------


@dataclass
class SpanDetector:
    """Encoder plus one detection head, bundled with its manifest."""

    params: ParameterSet

    @property
    def mode(self) -> str:
        return self.params.manifest["model"]

    @property
    def threshold(self) -> float:
        return self.params.manifest.get("threshold", 0.5)

    def encode(self, tokens, verb_index: int):
        return nn.encode(tokens, verb_index, self.params)

    def score_spans(self, tokens, verb_index: int) -> list:
        if self.mode != "span":
            raise ValueError("per-span probabilities need a span-scorer model")
        return span_probabilities(self.encode(tokens, verb_index), self.params)

    def detect(self, tokens, verb_index: int, tau: float | None = None) -> set:
        if self.mode == "span":
            threshold = self.threshold if tau is None else tau
            return select_spans(self.score_spans(tokens, verb_index), threshold)
        decoded = viterbi_decode(
            bio_scores(self.encode(tokens, verb_index), self.params))
        return tags_to_spans(decoded)

    def save(self, path) -> None:
        nn.save_checkpoint(self.params, path)

    @classmethod
    def load(cls, path) -> "SpanDetector":
        params = nn.load_checkpoint(path)
        if params.manifest.get("model") not in ("span", "bio"):
            raise ValueError("checkpoint is not a span detector")
        return cls(params)


def span_training_instances(corpus, rules=None) -> list:
    """(tokens, verb index, gold span set) triples for every verb entry."""
    out = []
    for record in corpus:
        for entry in record.verb_entries:
            out.append((record.tokens, entry.verb_index,
                        gold_answer_spans(entry, rules)))
    return out


def train_span_model(corpus, mode: str = "span", *, dev=None,
                     layers: int = 4, hidden: int = 300, embedding: int = 100,
                     recurrent_dropout: float = 0.1, mlp_hidden: int = 100,
                     epochs: int = 40, patience: int = 10, batch_size: int = 80,
                     seed: int = 0, threshold: float = 0.5,
                     rules=None) -> tuple[SpanDetector, TrainingHistory]:
    """Fit a detector on every verb entry of the corpus."""
    if mode not in ("span", "bio"):
        raise ValueError(f"unknown span model kind {mode!r}")
    rng = np.random.default_rng(seed)
    vocab = nn.build_vocabulary(r.tokens for r in corpus)
    params = nn.init_encoder(vocab, rng, layers=layers, hidden=hidden,
                             embedding=embedding,
                             recurrent_dropout=recurrent_dropout)
    params.manifest["model"] = mode
    params.manifest["threshold"] = threshold
    if mode == "span":
        nn.init_mlp(params, "span", 2 * hidden, mlp_hidden, 1, rng)
    else:
        nn.init_mlp(params, "bio", hidden, mlp_hidden, 3, rng)

    instances = span_training_instances(corpus, rules)
    dev_instances = span_training_instances(dev, rules) if dev else None

    def loss_fn(instance, train_rng):
        tokens, verb_index, gold = instance
        train = train_rng is not None
        encoded = nn.encode(tokens, verb_index, params, train=train,
                            rng=train_rng)
        if mode == "span":
            total = None
            for (i, j), logit in span_logits(encoded, params).items():
                term = nn.bce_with_logits(
                    logit, 1.0 if AnswerSpan(i, j) in gold else 0.0)
                total = term if total is None else total + term
            return total
        tags = spans_to_tags(bio_projection(gold), len(tokens))
        total = None
        for position, row in enumerate(bio_log_scores(encoded, params)):
            term = -row[TAG_INDEX[tags[position]]]
            total = term if total is None else total + term
        return total

    history = train_loop(params, instances, loss_fn, dev=dev_instances,
                         epochs=epochs, patience=patience,
                         batch_size=batch_size, seed=seed)
    return SpanDetector(params), history


def tune_threshold(detector: SpanDetector, dev_corpus,
                   matcher: Matcher = EXACT, step: float = 0.01,
                   rules=None) -> float:
    """Grid-search the span threshold maximizing dev F1.

    Returns the smallest maximizing value on the grid; also stores it in
    the detector manifest.
    """
    if not dev_corpus:
        raise ValueError("empty dev corpus")
    scored = []
    for record in dev_corpus:
        for entry in record.verb_entries:
            scored.append((detector.score_spans(record.tokens, entry.verb_index),
                           gold_question_spans(entry, rules)))
    best_tau = 0.0
    best_f1 = -1.0
    for tau in np.arange(0.0, 1.0 + step / 2, step):
        tau = round(float(tau), 10)
        instances = [(select_spans(spans, tau), gold) for spans, gold in scored]
        f1 = span_detection_prf_micro(instances, matcher).f1
        if f1 > best_f1:
            best_f1 = f1
            best_tau = tau
    detector.params.manifest["threshold"] = best_tau
    return best_tau
