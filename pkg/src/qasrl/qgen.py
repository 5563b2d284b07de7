"""Question generation from answer-span representations.

Two model families share an interface: a local model that predicts each of
the seven slots independently from the span representation, and a sequence
model that decodes slots left to right through stacked LSTM cells so that
later slots can condition on earlier choices.  Both produce distributions
over closed per-slot vocabularies; the verb slot ranges over the abstract
(auxChain, form) pairs so the models are verb-independent.  Decoded
questions are not grammar-checked here; downstream consumers filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .corpus import AnswerSpan, SentenceRecord, question_is_valid
from .grammar import GrammarError, QuestionSlots, VerbSlot
from .grammar.slots import (
    AUX_VALUES,
    MISC_VALUES,
    OBJ_VALUES,
    SUBJ_VALUES,
    VERB_PAIRS,
    WH_VALUES,
    default_prepositions,
)
from .training import TrainingHistory, train_loop

SLOT_COUNT = 7

DECODER_DEFAULTS = {
    "decoderLayers": 4,
    "decoderHidden": 200,
    "tokenEmbedding": 100,
    "mlpHidden": 100,
}

_KINDS = ("local", "seq")


def slot_vocabularies(prepositions=None) -> tuple[tuple, ...]:
    """Per-slot value tuples in template order; verb values are pairs."""
    preps = default_prepositions() if prepositions is None else tuple(prepositions)
    return (
        WH_VALUES,
        AUX_VALUES,
        SUBJ_VALUES,
        VERB_PAIRS,
        OBJ_VALUES,
        ("",) + preps,
        MISC_VALUES,
    )


def value_indices(slots: QuestionSlots, vocabularies) -> tuple[int, ...]:
    """Vocabulary index of each slot value; raises if a value is unknown."""
    indices = []
    for name, value, vocab in zip(
            ("wh", "aux", "subj", "verb", "obj", "prep", "misc"),
            slots.astuple(), vocabularies):
        try:
            indices.append(vocab.index(value))
        except ValueError:
            raise GrammarError(f"slot {name} value {value!r} has no "
                               "vocabulary entry") from None
    return tuple(indices)


def values_to_slots(values) -> QuestionSlots:
    wh, aux, subj, verb, obj, prep, misc = values
    return QuestionSlots(wh, aux, subj, VerbSlot(*verb), obj, prep, misc)


@dataclass
class SlotDistributions:
    """Seven per-slot probability distributions, one per template slot."""

    vocabularies: tuple[tuple, ...]
    distributions: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.distributions) != SLOT_COUNT:
            raise ValueError("expected one distribution per slot")
        for vocab, dist in zip(self.vocabularies, self.distributions):
            if dist.shape != (len(vocab),):
                raise ValueError("distribution length does not match its "
                                 "slot vocabulary")
            if abs(float(dist.sum()) - 1.0) > 1e-6:
                raise ValueError("slot distribution does not sum to 1")

    def argmax_values(self) -> tuple:
        return tuple(vocab[int(np.argmax(dist))] for vocab, dist
                     in zip(self.vocabularies, self.distributions))

    def argmax_question(self) -> QuestionSlots:
        return values_to_slots(self.argmax_values())

    def max_probability(self) -> float:
        return float(np.prod([dist.max() for dist in self.distributions]))


def span_representation(encoded: nn.EncodedSentence, span: AnswerSpan) -> nn.Tensor:
    """Concatenated encoder outputs at the span endpoints."""
    return nn.concat((encoded.vectors[span.start], encoded.vectors[span.end]))


def _head_logits(features: nn.Tensor, params, prefix: str, k: int) -> nn.Tensor:
    return features @ params[f"{prefix}/head{k}/w"] + params[f"{prefix}/head{k}/b"]


def _trunk(vector: nn.Tensor, params, prefix: str) -> nn.Tensor:
    return nn.relu(vector @ params[f"{prefix}/trunk/w"]
                   + params[f"{prefix}/trunk/b"])


def init_local_question_model(params, vocabularies, rng, *, span_dim: int,
                              mlp_hidden: int = 100,
                              prefix: str = "qgen") -> None:
    params.add(f"{prefix}/trunk/w", nn.init_orthonormal((span_dim, mlp_hidden), rng))
    params.add(f"{prefix}/trunk/b", np.zeros(mlp_hidden, dtype=nn.default_dtype()))
    for k, vocab in enumerate(vocabularies):
        params.add(f"{prefix}/head{k}/w",
                   nn.init_orthonormal((mlp_hidden, len(vocab)), rng))
        params.add(f"{prefix}/head{k}/b",
                   np.zeros(len(vocab), dtype=nn.default_dtype()))


def _init_cell(params, prefix: str, in_dim: int, hidden: int, rng) -> None:
    w = np.concatenate([nn.init_orthonormal((in_dim, hidden), rng)
                        for _ in range(4)], axis=1)
    u = np.concatenate([nn.init_orthonormal((hidden, hidden), rng)
                        for _ in range(4)], axis=1)
    b = np.zeros(4 * hidden, dtype=w.dtype)
    b[hidden:2 * hidden] = 1.0  # forget gate starts open
    params.add(f"{prefix}/w", w)
    params.add(f"{prefix}/u", u)
    params.add(f"{prefix}/b", b)


def init_seq_question_model(params, vocabularies, rng, *, span_dim: int,
                            layers: int = 4, hidden: int = 200,
                            token_embedding: int = 100, mlp_hidden: int = 100,
                            prefix: str = "qgen") -> None:
    """Decoder weights: per-slot LSTM cell stacks plus shared output trunk.

    Slot k runs `layers` cells with weights of their own; the bottom input
    is [span representation ; embedding of the previous slot's value], and
    recurrent state flows slot to slot within each layer.
    """
    params.add(f"{prefix}/start", nn.init_uniform((token_embedding,), rng))
    for k, vocab in enumerate(vocabularies):
        if k < SLOT_COUNT - 1:  # the last slot's value is never fed back
            params.add(f"{prefix}/emb{k}",
                       nn.init_uniform((len(vocab), token_embedding), rng))
        in_dim = span_dim + token_embedding
        for layer in range(layers):
            _init_cell(params, f"{prefix}/slot{k}/l{layer}",
                       in_dim if layer == 0 else hidden, hidden, rng)
        params.add(f"{prefix}/head{k}/w",
                   nn.init_orthonormal((mlp_hidden, len(vocab)), rng))
        params.add(f"{prefix}/head{k}/b",
                   np.zeros(len(vocab), dtype=nn.default_dtype()))
    params.add(f"{prefix}/trunk/w", nn.init_orthonormal((hidden, mlp_hidden), rng))
    params.add(f"{prefix}/trunk/b", np.zeros(mlp_hidden, dtype=nn.default_dtype()))


def _dist(log_dist: nn.Tensor) -> np.ndarray:
    d = np.exp(log_dist.value.astype(np.float64))
    return d / d.sum()


def qgen_local(span_repr: nn.Tensor, params, vocabularies=None,
               prefix: str = "qgen") -> SlotDistributions:
    """Independent softmax over each slot's vocabulary."""
    if vocabularies is None:
        vocabularies = _manifest_vocabularies(params)
    dists = tuple(_dist(d) for d in _local_log_dists(span_repr, params, prefix))
    return SlotDistributions(tuple(vocabularies), dists)


def _local_log_dists(span_repr, params, prefix):
    features = _trunk(span_repr, params, prefix)
    return [nn.log_softmax(_head_logits(features, params, prefix, k))
            for k in range(SLOT_COUNT)]


def _seq_forward(span_repr, params, *, layers: int, hidden: int,
                 gold_indices=None, prefix: str = "qgen"):
    """Greedy (or teacher-forced) decode; returns log-dists and choices."""
    state = [(nn.zeros(hidden), nn.zeros(hidden)) for _ in range(layers)]
    prev = params[f"{prefix}/start"]
    log_dists = []
    chosen = []
    for k in range(SLOT_COUNT):
        x = nn.concat((span_repr, prev))
        for layer in range(layers):
            cell = f"{prefix}/slot{k}/l{layer}"
            h, c = nn.lstm_step(x, state[layer][0], state[layer][1],
                                params[f"{cell}/w"], params[f"{cell}/u"],
                                params[f"{cell}/b"], hidden)
            state[layer] = (h, c)
            x = h
        features = _trunk(x, params, prefix)
        log_dist = nn.log_softmax(_head_logits(features, params, prefix, k))
        log_dists.append(log_dist)
        index = int(np.argmax(log_dist.value)) if gold_indices is None \
            else int(gold_indices[k])
        chosen.append(index)
        if k < SLOT_COUNT - 1:
            prev = params[f"{prefix}/emb{k}"][index]
    return log_dists, chosen


def _decoder_shape(params) -> tuple[int, int]:
    manifest = params.manifest
    return int(manifest["decoderLayers"]), int(manifest["decoderHidden"])


def qgen_seq_decode(span_repr: nn.Tensor, params, vocabularies=None,
                    prefix: str = "qgen") -> QuestionSlots:
    """Greedy left-to-right decode; each slot feeds the next its choice."""
    if vocabularies is None:
        vocabularies = _manifest_vocabularies(params)
    layers, hidden = _decoder_shape(params)
    _, chosen = _seq_forward(span_repr, params, layers=layers, hidden=hidden,
                             prefix=prefix)
    return values_to_slots(tuple(vocab[i] for vocab, i
                                 in zip(vocabularies, chosen)))


def qgen_seq_distributions(span_repr: nn.Tensor, params, vocabularies=None,
                           prefix: str = "qgen") -> SlotDistributions:
    """Per-slot distributions along the greedy decode path."""
    if vocabularies is None:
        vocabularies = _manifest_vocabularies(params)
    layers, hidden = _decoder_shape(params)
    log_dists, _ = _seq_forward(span_repr, params, layers=layers,
                                hidden=hidden, prefix=prefix)
    return SlotDistributions(tuple(vocabularies),
                             tuple(_dist(d) for d in log_dists))


def question_nll(span_repr, gold_indices, params, kind: str,
                 prefix: str = "qgen") -> nn.Tensor:
    """Negative log-likelihood of the gold slot values."""
    if kind == "local":
        log_dists = _local_log_dists(span_repr, params, prefix)
    else:
        layers, hidden = _decoder_shape(params)
        log_dists, _ = _seq_forward(span_repr, params, layers=layers,
                                    hidden=hidden, gold_indices=gold_indices,
                                    prefix=prefix)
    total = None
    for log_dist, index in zip(log_dists, gold_indices):
        term = -log_dist[int(index)]
        total = term if total is None else total + term
    return total


def _manifest_vocabularies(params) -> tuple[tuple, ...]:
    preps = params.manifest.get("prepositions")
    vocabs = slot_vocabularies(preps)
    # verb pairs come back from JSON as lists
    return tuple(tuple(tuple(v) if isinstance(v, list) else v for v in vocab)
                 for vocab in vocabs)


class QuestionGenerator:
    """A trained question model: encoder plus local or sequential head."""

    def __init__(self, params: nn.ParameterSet):
        kind = params.manifest.get("questionModel")
        if kind not in _KINDS:
            raise ValueError(f"not a question model checkpoint: {kind!r}")
        self.params = params

    @property
    def kind(self) -> str:
        return self.params.manifest["questionModel"]

    @property
    def vocabularies(self) -> tuple[tuple, ...]:
        return _manifest_vocabularies(self.params)

    def encode(self, tokens, verb_index: int) -> nn.EncodedSentence:
        return nn.encode(tokens, verb_index, self.params)

    def distributions(self, tokens, verb_index: int,
                      span: AnswerSpan) -> SlotDistributions:
        repr_ = span_representation(self.encode(tokens, verb_index), span)
        if self.kind == "local":
            return qgen_local(repr_, self.params, self.vocabularies)
        return qgen_seq_distributions(repr_, self.params, self.vocabularies)

    def generate(self, tokens, verb_index: int,
                 span: AnswerSpan) -> tuple[QuestionSlots, float]:
        """Most likely question for the span, with its decode probability."""
        dists = self.distributions(tokens, verb_index, span)
        return dists.argmax_question(), dists.max_probability()

    def save(self, path) -> None:
        nn.save_checkpoint(self.params, path)

    @classmethod
    def load(cls, path) -> "QuestionGenerator":
        return cls(nn.load_checkpoint(path))


def question_training_instances(corpus, rules=None):
    """(tokens, verb index, span, gold slots) for every valid question."""
    instances = []
    for record in corpus:
        for entry in record.verb_entries:
            for pair in entry.qa_pairs:
                if not question_is_valid(pair, rules):
                    continue
                spans = []
                for judgment in pair.judgments:
                    if not judgment.is_valid:
                        continue
                    for span in judgment.spans:
                        if span not in spans:
                            spans.append(span)
                for span in spans:
                    instances.append((record.tokens, entry.verb_index,
                                      span, pair.slots))
    return instances


def train_question_model(corpus, kind: str = "seq", *, dev=None,
                         layers: int | None = None, hidden: int | None = None,
                         embedding: int | None = None,
                         recurrent_dropout: float | None = None,
                         decoder_layers: int = 4, decoder_hidden: int = 200,
                         token_embedding: int = 100, mlp_hidden: int = 100,
                         epochs: int = 40, patience: int = 10,
                         batch_size: int = 80, seed: int = 0, rules=None,
                         prepositions=None,
                         embedding_table=None):
    """Train a question model on the valid questions of a corpus.

    Returns the generator and its training history.  Training minimizes the
    summed negative log-likelihood of gold slot values; the sequence model
    is teacher forced (gold previous value fed to the next slot).
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown question model kind: {kind!r}")
    instances = question_training_instances(corpus, rules)
    if not instances:
        raise ValueError("training set is empty")
    rng = np.random.default_rng(seed)
    vocab = nn.build_vocabulary([r.tokens for r in corpus])
    params = nn.init_encoder(vocab, rng, layers=layers, hidden=hidden,
                             embedding=embedding,
                             recurrent_dropout=recurrent_dropout,
                             embedding_table=embedding_table)
    vocabularies = slot_vocabularies(prepositions)
    span_dim = 2 * params.manifest["hidden"]
    if kind == "local":
        init_local_question_model(params, vocabularies, rng,
                                  span_dim=span_dim, mlp_hidden=mlp_hidden)
    else:
        init_seq_question_model(params, vocabularies, rng, span_dim=span_dim,
                                layers=decoder_layers, hidden=decoder_hidden,
                                token_embedding=token_embedding,
                                mlp_hidden=mlp_hidden)
        params.manifest["decoderLayers"] = decoder_layers
        params.manifest["decoderHidden"] = decoder_hidden
    params.manifest["questionModel"] = kind
    params.manifest["prepositions"] = list(vocabularies[5][1:])

    indexed = [(tokens, verb_index, span,
                value_indices(slots, vocabularies))
               for tokens, verb_index, span, slots in instances]
    dev_indexed = None
    if dev is not None:
        dev_indexed = [
            (tokens, verb_index, span, value_indices(slots, vocabularies))
            for tokens, verb_index, span, slots
            in question_training_instances(dev, rules)]

    def loss_fn(instance, step_rng):
        tokens, verb_index, span, gold = instance
        encoded = nn.encode(tokens, verb_index, params,
                            train=step_rng is not None, rng=step_rng)
        repr_ = span_representation(encoded, span)
        return question_nll(repr_, gold, params, kind)

    history = train_loop(params, indexed, loss_fn, dev=dev_indexed,
                         epochs=epochs, patience=patience,
                         batch_size=batch_size, seed=seed)
    return QuestionGenerator(params), history
