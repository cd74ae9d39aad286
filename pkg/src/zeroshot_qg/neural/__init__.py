"""Minimal dense-array math: explicit forward/backward passes and RMSProp."""

from .ops import (
    AttentionWeights,
    GruWeights,
    affine,
    affine_backward,
    attend,
    attend_backward,
    gru_cell,
    gru_cell_backward,
    nll_loss,
    require_finite,
    sigmoid,
    softmax,
)
from .optim import RmsProp, anneal, clip_gradients
from .params import Parameter, ParameterSet

__all__ = [
    "AttentionWeights",
    "GruWeights",
    "Parameter",
    "ParameterSet",
    "RmsProp",
    "affine",
    "affine_backward",
    "anneal",
    "attend",
    "attend_backward",
    "clip_gradients",
    "gru_cell",
    "gru_cell_backward",
    "nll_loss",
    "require_finite",
    "sigmoid",
    "softmax",
]
