"""Adam optimizer over Parameter objects."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .tensor import Parameter


@dataclass
class AdamConfig:
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def adam_step(params: Iterable[Parameter], config: AdamConfig) -> int:
    """Bias-corrected Adam update; gradients are cleared afterwards.

    Parameters without a gradient are skipped; returns how many were
    skipped so callers can surface the warning count.
    """
    skipped = 0
    for p in params:
        if p.grad is None:
            skipped += 1
            continue
        g = p.grad
        p.adam_step_count += 1
        t = p.adam_step_count
        p.adam_m = config.beta1 * p.adam_m + (1.0 - config.beta1) * g
        p.adam_v = config.beta2 * p.adam_v + (1.0 - config.beta2) * (g * g)
        m_hat = p.adam_m / (1.0 - config.beta1 ** t)
        v_hat = p.adam_v / (1.0 - config.beta2 ** t)
        p.data = p.data - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        p.grad = None
    return skipped
