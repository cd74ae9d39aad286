"""Gradient clipping and the RMSProp optimizer."""

import math

import numpy as np

from ..errors import DomainError


def clip_gradients(params, max_norm):
    """Scale all gradients so their global L2 norm is at most ``max_norm``.

    Returns the effective scale (1.0 when no clipping happened).
    """
    if max_norm <= 0:
        raise DomainError(f"max_norm must be positive, got {max_norm}")
    total = 0.0
    for p in params:
        total += float(np.sum(p.grad * p.grad))
    norm = math.sqrt(total)
    if norm <= max_norm or norm == 0.0:
        return 1.0
    scale = max_norm / norm
    for p in params:
        p.grad *= scale
    return scale


class RmsProp:
    """RMSProp with a per-parameter running mean of squared gradients.

    acc <- decay * acc + (1 - decay) * grad^2
    value <- value - lr * grad / (sqrt(acc) + eps)
    """

    def __init__(self, params, decay=0.9, eps=1e-8):
        if not (0.0 < decay < 1.0):
            raise DomainError(f"decay must be in (0,1), got {decay}")
        self.decay = decay
        self.eps = eps
        self.acc = {p.name: np.zeros_like(p.value) for p in params}

    def step(self, params, learning_rate):
        for p in params:
            acc = self.acc[p.name]
            acc *= self.decay
            acc += (1.0 - self.decay) * p.grad * p.grad
            p.value -= learning_rate * p.grad / (np.sqrt(acc) + self.eps)

    def state_arrays(self):
        return {f"rmsprop.{name}": acc for name, acc in self.acc.items()}


def anneal(learning_rate, factor=0.99, floor=1e-5):
    """Per-epoch learning-rate decay with a floor."""
    return max(learning_rate * factor, floor)
