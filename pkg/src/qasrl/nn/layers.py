"""Sentence encoder and feed-forward heads on the autodiff tape.

The encoder is a stack of single-direction LSTM layers with alternating
direction (layer 1 runs left to right, layer 2 right to left, and so on),
gated highway connections between layers, and per-sequence recurrent
dropout.  Each token's input is its word embedding concatenated with an
embedded binary predicate-indicator feature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape
from .params import ParameterSet, init_orthonormal, init_uniform
from .tape import Tensor, concat, relu, sigmoid, tanh

UNKNOWN_TOKEN = "<unk>"

ENCODER_DEFAULTS = {
    "layers": 4,
    "hidden": 300,
    "embedding": 100,
    "recurrentDropout": 0.1,
}


def lstm_gates(x: Tensor, h: Tensor, w: Tensor, u: Tensor, b: Tensor,
               hidden: int):
    """Gate activations for one step: input, forget, candidate, output."""
    z = x @ w + h @ u + b
    i = sigmoid(z[0:hidden])
    f = sigmoid(z[hidden:2 * hidden])
    g = tanh(z[2 * hidden:3 * hidden])
    o = sigmoid(z[3 * hidden:4 * hidden])
    return i, f, g, o


def lstm_step(x: Tensor, h: Tensor, c: Tensor, w: Tensor, u: Tensor,
              b: Tensor, hidden: int):
    """One LSTM cell update; returns (new hidden, new cell)."""
    i, f, g, o = lstm_gates(x, h, w, u, b, hidden)
    c_new = f * c + i * g
    h_new = o * tanh(c_new)
    return h_new, c_new


def init_lstm_block(params: ParameterSet, prefix: str, in_dim: int,
                    hidden: int, rng) -> None:
    """Weights for one LSTM layer plus its highway gate and carry projection."""
    w = np.concatenate([init_orthonormal((in_dim, hidden), rng)
                        for _ in range(4)], axis=1)
    u = np.concatenate([init_orthonormal((hidden, hidden), rng)
                        for _ in range(4)], axis=1)
    b = np.zeros(4 * hidden, dtype=w.dtype)
    b[hidden:2 * hidden] = 1.0  # forget gate starts open
    params.add(f"{prefix}/w", w)
    params.add(f"{prefix}/u", u)
    params.add(f"{prefix}/b", b)
    params.add(f"{prefix}/gate_w", init_orthonormal((in_dim, hidden), rng))
    params.add(f"{prefix}/gate_u", init_orthonormal((hidden, hidden), rng))
    params.add(f"{prefix}/gate_b", np.zeros(hidden, dtype=w.dtype))
    params.add(f"{prefix}/carry_w", init_orthonormal((in_dim, hidden), rng))


@dataclass
class EncodedSentence:
    """Encoder outputs: one vector per token, on the tape."""

    vectors: list

    def __len__(self):
        return len(self.vectors)

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([v.value for v in self.vectors])


def build_vocabulary(corpus_tokens) -> dict[str, int]:
    """Token to row-index map with the unknown token at row 0."""
    vocab = {UNKNOWN_TOKEN: 0}
    for tokens in corpus_tokens:
        for token in tokens:
            lowered = token.lower()
            if lowered not in vocab:
                vocab[lowered] = len(vocab)
    return vocab


def load_embeddings_text(path, vocab: dict[str, int], dim: int,
                         rng) -> np.ndarray:
    """Seed an embedding matrix from a whitespace token-vector text file."""
    table = init_uniform((len(vocab), dim), rng)
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split()
            if len(parts) != dim + 1:
                continue
            row = vocab.get(parts[0].lower())
            if row is not None:
                table[row] = np.asarray([float(v) for v in parts[1:]],
                                        dtype=table.dtype)
    return table


def init_encoder(vocab: dict[str, int], rng, layers: int | None = None,
                 hidden: int | None = None, embedding: int | None = None,
                 recurrent_dropout: float | None = None,
                 embedding_table: np.ndarray | None = None) -> ParameterSet:
    """Fresh encoder parameters; hyperparameters go into the manifest."""
    manifest = dict(ENCODER_DEFAULTS)
    if layers is not None:
        manifest["layers"] = layers
    if hidden is not None:
        manifest["hidden"] = hidden
    if embedding is not None:
        manifest["embedding"] = embedding
    if recurrent_dropout is not None:
        manifest["recurrentDropout"] = recurrent_dropout
    manifest["vocabulary"] = dict(vocab)

    emb = manifest["embedding"]
    hid = manifest["hidden"]
    params = ParameterSet(manifest)
    if embedding_table is None:
        embedding_table = init_uniform((len(vocab), emb), rng)
    params.add("embed/tokens", embedding_table)
    params.add("embed/indicator", init_uniform((2, emb), rng))
    in_dim = 2 * emb
    for layer in range(manifest["layers"]):
        init_lstm_block(params, f"encoder/layer{layer}", in_dim, hid, rng)
        in_dim = hid
    return params


def encode(tokens, verb_index: int, params: ParameterSet, train: bool = False,
           rng=None) -> EncodedSentence:
    """Run the encoder over one sentence for one marked predicate.

    Per layer and step, with m the per-sequence dropout mask (all ones in
    inference mode) and h' = m * h_{t-1}:
        i,f,o = sigmoid parts and g = tanh part of x W + h' U + b
        c_t = f * c_{t-1} + i * g ;  h_t = o * tanh(c_t)
        r = sigmoid(x Wg + h' Ug + bg)
        out_t = r * h_t + (1 - r) * (x Wc)
    Deterministic in inference mode; dropout masks are drawn from `rng`
    only when `train` is set.
    """
    manifest = params.manifest
    vocab = manifest["vocabulary"]
    layers = manifest["layers"]
    hidden = manifest["hidden"]
    drop = manifest.get("recurrentDropout", 0.0)
    if not 0 <= verb_index < len(tokens):
        raise ValueError(f"verb index {verb_index} outside sentence")

    token_table = params["embed/tokens"]
    indicator_table = params["embed/indicator"]
    sequence = []
    for position, token in enumerate(tokens):
        row = vocab.get(token.lower(), vocab[UNKNOWN_TOKEN])
        marked = 1 if position == verb_index else 0
        sequence.append(concat([token_table[row], indicator_table[marked]]))

    for layer in range(layers):
        prefix = f"encoder/layer{layer}"
        w, u, b = params[f"{prefix}/w"], params[f"{prefix}/u"], params[f"{prefix}/b"]
        gw, gu, gb = (params[f"{prefix}/gate_w"], params[f"{prefix}/gate_u"],
                      params[f"{prefix}/gate_b"])
        cw = params[f"{prefix}/carry_w"]
        if train and drop > 0.0:
            if rng is None:
                raise ValueError("training mode needs an rng for dropout masks")
            keep = 1.0 - drop
            mask = tape.as_tensor(
                (rng.random(hidden) < keep).astype(w.value.dtype) / keep,
                like=w)
        else:
            mask = None
        order = range(len(sequence))
        if layer % 2 == 1:
            order = reversed(order)
        h = tape.zeros(hidden)
        c = tape.zeros(hidden)
        outputs = [None] * len(sequence)
        for position in order:
            x = sequence[position]
            h_in = h * mask if mask is not None else h
            h, c = lstm_step(x, h_in, c, w, u, b, hidden)
            gate = sigmoid(x @ gw + h_in @ gu + gb)
            outputs[position] = gate * h + (1.0 - gate) * (x @ cw)
        sequence = outputs
    return EncodedSentence(vectors=sequence)


# feed-forward heads ------------------------------------------------------


def init_mlp(params: ParameterSet, prefix: str, in_dim: int, hidden: int,
             out_dim: int, rng) -> None:
    dtype = tape.default_dtype()
    params.add(f"{prefix}/w1", init_orthonormal((in_dim, hidden), rng))
    params.add(f"{prefix}/b1", np.zeros(hidden, dtype=dtype))
    params.add(f"{prefix}/w2", init_orthonormal((hidden, out_dim), rng))
    params.add(f"{prefix}/b2", np.zeros(out_dim, dtype=dtype))


def mlp(vector: Tensor, params: ParameterSet, prefix: str) -> Tensor:
    """One rectified hidden layer then an affine map to the output space."""
    hidden = relu(vector @ params[f"{prefix}/w1"] + params[f"{prefix}/b1"])
    return hidden @ params[f"{prefix}/w2"] + params[f"{prefix}/b2"]
