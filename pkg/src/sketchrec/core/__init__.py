from .tensor import (
    Parameter,
    ShapeMismatch,
    Tensor,
    backward,
    balanced_binary_ce,
    clip,
    concat,
    cross_entropy,
    layer_norm,
    log_softmax,
    max_reduce,
    pairwise_sqdist,
    softmax,
    stack,
    take_rows,
    zero_grads,
)
from .optim import AdamConfig, adam_step
from .rnn import lstm_final_states
from . import kernels

__all__ = [
    "Parameter",
    "ShapeMismatch",
    "Tensor",
    "backward",
    "balanced_binary_ce",
    "clip",
    "concat",
    "cross_entropy",
    "layer_norm",
    "log_softmax",
    "max_reduce",
    "pairwise_sqdist",
    "softmax",
    "stack",
    "take_rows",
    "zero_grads",
    "AdamConfig",
    "adam_step",
    "lstm_final_states",
    "kernels",
]
