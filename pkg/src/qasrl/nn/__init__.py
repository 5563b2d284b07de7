"""Numpy neural substrate: autodiff tape, encoder, heads, optimizer."""

from .check import GradCheckReport, gradient_check
from .layers import (
    ENCODER_DEFAULTS,
    UNKNOWN_TOKEN,
    EncodedSentence,
    build_vocabulary,
    encode,
    init_encoder,
    init_lstm_block,
    init_mlp,
    load_embeddings_text,
    lstm_step,
    mlp,
)
from .optim import Adadelta, clip_global_norm, global_norm
from .params import (
    ParameterSet,
    init_orthonormal,
    init_uniform,
    load_checkpoint,
    save_checkpoint,
)
from .tape import (
    default_dtype,
    Tensor,
    as_tensor,
    bce_with_logits,
    concat,
    exp,
    float64_mode,
    log,
    log_softmax,
    relu,
    sigmoid,
    softmax,
    stack,
    tanh,
    zeros,
)

__all__ = [
    "ENCODER_DEFAULTS", "UNKNOWN_TOKEN",
    "Adadelta", "EncodedSentence", "GradCheckReport", "ParameterSet", "Tensor",
    "as_tensor", "bce_with_logits", "build_vocabulary", "clip_global_norm",
    "concat", "default_dtype", "encode", "exp", "float64_mode", "global_norm", "gradient_check",
    "init_encoder", "init_lstm_block", "init_mlp", "init_orthonormal",
    "init_uniform", "load_checkpoint", "load_embeddings_text", "log",
    "log_softmax", "lstm_step", "mlp", "relu", "save_checkpoint", "sigmoid",
    "softmax", "stack", "tanh", "zeros",
]
