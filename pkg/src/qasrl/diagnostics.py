"""Randomized gradient audits for every trainable head.

Each audit rebuilds a tiny fresh model per instance (new weights, new
input) and compares tape gradients against central finite differences in
64-bit mode.  Sizes are deliberately small: the point is correctness of
the analytic gradients, not capacity, and the audit must stay fast enough
to run routinely.
"""

from __future__ import annotations

import string

import numpy as np

from . import nn
from .corpus import AnswerSpan
from .qgen import (
    init_local_question_model,
    init_seq_question_model,
    question_nll,
    slot_vocabularies,
    span_representation,
)
from .spandet import bio_log_scores, span_logits

HEADS = ("encoder", "bio", "span", "qgen-local", "qgen-seq")

_TINY_PREPOSITIONS = ("to",)


def _random_tokens(rng) -> list[str]:
    length = int(rng.integers(2, 5))
    letters = string.ascii_lowercase[:6]
    return [letters[int(rng.integers(len(letters)))] for _ in range(length)]


def _tiny_encoder(tokens, rng):
    vocab = nn.build_vocabulary([tokens])
    return nn.init_encoder(vocab, rng, layers=1, hidden=2, embedding=2,
                           recurrent_dropout=0.0)


def _encoder_instance(rng):
    tokens = _random_tokens(rng)
    params = _tiny_encoder(tokens, rng)
    verb = int(rng.integers(len(tokens)))

    def loss():
        encoded = nn.encode(tokens, verb, params)
        total = None
        for row in encoded.vectors:
            term = (row ** 2).sum()
            total = term if total is None else total + term
        return total

    return loss, params


def _bio_instance(rng):
    tokens = _random_tokens(rng)
    params = _tiny_encoder(tokens, rng)
    nn.init_mlp(params, "bio", 2, 3, 3, rng)
    verb = int(rng.integers(len(tokens)))
    tags = [int(rng.integers(3)) for _ in tokens]

    def loss():
        encoded = nn.encode(tokens, verb, params)
        rows = bio_log_scores(encoded, params)
        total = None
        for row, tag in zip(rows, tags):
            term = -row[tag]
            total = term if total is None else total + term
        return total

    return loss, params


def _span_instance(rng):
    tokens = _random_tokens(rng)
    params = _tiny_encoder(tokens, rng)
    nn.init_mlp(params, "span", 4, 3, 1, rng)
    verb = int(rng.integers(len(tokens)))
    n = len(tokens)
    labels = {(i, j): float(rng.integers(2))
              for i in range(n) for j in range(i, n)}

    def loss():
        encoded = nn.encode(tokens, verb, params)
        total = None
        for key, logit in span_logits(encoded, params).items():
            term = nn.bce_with_logits(logit, labels[key])
            total = term if total is None else total + term
        return total

    return loss, params


def _random_gold(vocabularies, rng):
    return tuple(int(rng.integers(len(v))) for v in vocabularies)


def _qgen_local_instance(rng):
    vocabs = slot_vocabularies(prepositions=_TINY_PREPOSITIONS)
    params = nn.ParameterSet()
    init_local_question_model(params, vocabs, rng, span_dim=3, mlp_hidden=3)
    span_repr = nn.as_tensor(rng.normal(size=3))
    gold = _random_gold(vocabs, rng)

    def loss():
        return question_nll(span_repr, gold, params, "local")

    return loss, params


def _qgen_seq_instance(rng):
    vocabs = slot_vocabularies(prepositions=_TINY_PREPOSITIONS)
    params = nn.ParameterSet()
    init_seq_question_model(params, vocabs, rng, span_dim=2, layers=1,
                            hidden=2, token_embedding=1, mlp_hidden=2)
    params.manifest["decoderLayers"] = 1
    params.manifest["decoderHidden"] = 2
    span_repr = nn.as_tensor(rng.normal(size=2))
    gold = _random_gold(vocabs, rng)

    def loss():
        return question_nll(span_repr, gold, params, "seq")

    return loss, params


_BUILDERS = {
    "encoder": _encoder_instance,
    "bio": _bio_instance,
    "span": _span_instance,
    "qgen-local": _qgen_local_instance,
    "qgen-seq": _qgen_seq_instance,
}


def check_head(head: str, *, instances: int = 20, seed: int = 0,
               tolerance: float = 1e-4) -> dict:
    """Audit one head over freshly sampled micro-instances."""
    if head not in _BUILDERS:
        raise ValueError(f"unknown head {head!r}; choose from {HEADS}")
    if instances < 1:
        raise ValueError("need at least one instance")
    rng = np.random.default_rng(seed)
    worst = 0.0
    with nn.float64_mode():
        for _ in range(instances):
            loss_fn, params = _BUILDERS[head](rng)
            report = nn.gradient_check(loss_fn, params, tolerance=tolerance)
            worst = max(worst, report.max_relative_error)
    return {"head": head, "instances": instances,
            "maxRelativeError": worst, "tolerance": tolerance,
            "passed": worst < tolerance}


def check_all_heads(*, instances: int = 20, seed: int = 0,
                    tolerance: float = 1e-4) -> dict:
    """Audit every head; overall pass requires every head to pass."""
    reports = [check_head(head, instances=instances, seed=seed + i,
                          tolerance=tolerance)
               for i, head in enumerate(HEADS)]
    return {"heads": reports, "passed": all(r["passed"] for r in reports)}


__all__ = ["HEADS", "check_all_heads", "check_head"]
