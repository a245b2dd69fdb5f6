"""Semantic component memory: multi-head learnable keys, the Student-t
style similarity kernel, soft stroke-to-component assignment, the two
fusion strategies, and the two memory losses.

Kernel, per head h:

    score[i,j,h] = (eps + |q_i - k_{j,h}|^2 / tau)^(-(tau+1)/2),

normalized over j. Heads are max-pooled per (stroke, component) and the
pooled scores are softmaxed over components to give the row-stochastic
assignment matrix C. Stroke-level fusion blends each stroke feature
toward its soft key mixture by its assignment confidence; component-level
fusion aggregates strokes into K component features blended with the keys
by per-component confidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    Parameter,
    Tensor,
    balanced_binary_ce,
    clip,
    cross_entropy,
    max_reduce,
    pairwise_sqdist,
    softmax,
    stack,
    take_rows,
)

STROKE_FUSION_MODES = ("convex", "keys_only", "strokes_only")
COMPONENT_FUSION_MODES = ("convex", "strokes_only")


@dataclass
class KernelConfig:
    tau: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.tau <= 0 or self.epsilon <= 0:
            raise ValueError("tau and epsilon must be positive")


class MemoryBank:
    """K component types x H heads of learnable d-dim keys."""

    def __init__(self, n_components: int, n_heads: int, d: int,
                 rng: np.random.Generator):
        self.n_components = n_components
        self.n_heads = n_heads
        self.d = d
        self.keys = Parameter(
            rng.normal(scale=0.02, size=(n_components, n_heads, d)), "memory.keys"
        )

    def parameters(self) -> Iterator[Parameter]:
        yield self.keys

    def flat_keys(self) -> Tensor:
        """(K*H, d) view; row j*H + h is head h of component j."""
        return self.keys.reshape(self.n_components * self.n_heads, self.d)


@dataclass
class AssignmentMatrix:
    C: Tensor                  # (N, K) row-stochastic
    head_choice: np.ndarray    # (N, K) argmax head per stroke/component
    max_conf: Tensor           # (N,) row max of C

    @property
    def n_strokes(self) -> int:
        return self.C.data.shape[0]

    @property
    def n_components(self) -> int:
        return self.C.data.shape[1]

    def to_dict(self) -> dict:
        return {
            "assignment": self.C.data.tolist(),
            "head_choice": self.head_choice.tolist(),
            "max_confidence": self.max_conf.data.tolist(),
        }


# module-level count of kernel calls where epsilon was not small relative
# to the mean scaled distance (the bias is supposed to be negligible)
_epsilon_warnings = 0


def epsilon_warning_count() -> int:
    return _epsilon_warnings


def reset_epsilon_warnings():
    global _epsilon_warnings
    _epsilon_warnings = 0


def kernel_scores(q: Tensor, bank: MemoryBank, cfg: KernelConfig) -> Tensor:
    """(N, K, H) normalized similarity scores, head-separately."""
    global _epsilon_warnings
    if not np.all(np.isfinite(q.data)):
        raise ValueError("non-finite stroke features")
    per_head = []
    mean_scaled = 0.0
    for h in range(bank.n_heads):
        keys_h = take_rows(
            bank.flat_keys(),
            np.arange(bank.n_components) * bank.n_heads + h,
        )
        d2 = pairwise_sqdist(q, keys_h)
        mean_scaled += float(d2.data.mean()) / cfg.tau
        sim = (d2 * (1.0 / cfg.tau) + cfg.epsilon) ** (-(cfg.tau + 1.0) / 2.0)
        per_head.append(sim / sim.sum(axis=1, keepdims=True))
    mean_scaled /= bank.n_heads
    if cfg.epsilon >= 0.01 * mean_scaled:
        _epsilon_warnings += 1
    return stack(per_head, axis=2)


def assign(scores: Tensor) -> AssignmentMatrix:
    """Pool heads by max, then softmax over components."""
    pooled, head_choice = max_reduce(scores, axis=2)
    c = softmax(pooled, axis=1)
    max_conf, _ = max_reduce(c, axis=1)
    return AssignmentMatrix(C=c, head_choice=head_choice, max_conf=max_conf)


def _selected_keys(assignment: AssignmentMatrix, bank: MemoryBank) -> Tensor:
    """(N, K, d) keys at each stroke's chosen head per component."""
    n, k = assignment.head_choice.shape
    idx = (np.arange(k)[None, :] * bank.n_heads + assignment.head_choice).reshape(-1)
    return take_rows(bank.flat_keys(), idx).reshape(n, k, bank.d)


def fuse_stroke_level(q: Tensor, assignment: AssignmentMatrix, bank: MemoryBank,
                      mode: str = "convex") -> Tensor:
    """(N, d) stroke tokens; blends strokes toward their key mixture."""
    if mode not in STROKE_FUSION_MODES:
        raise ValueError(f"unknown stroke fusion mode {mode!r}")
    if mode == "strokes_only":
        return q
    n, k = assignment.C.data.shape
    sel = _selected_keys(assignment, bank)
    ck = (assignment.C.reshape(n, k, 1) * sel).sum(axis=1)
    if mode == "keys_only":
        return ck
    alpha = assignment.max_conf.reshape(n, 1)
    return (1.0 - alpha) * q + alpha * ck


def _majority_heads(assignment: AssignmentMatrix, bank: MemoryBank) -> np.ndarray:
    """Per component, the head most often chosen across strokes (ties to
    the lowest head index)."""
    n, k = assignment.head_choice.shape
    majority = np.zeros(k, dtype=np.int64)
    for j in range(k):
        counts = np.bincount(assignment.head_choice[:, j], minlength=bank.n_heads)
        majority[j] = int(np.argmax(counts))
    return majority


def fuse_component_level(q: Tensor, assignment: AssignmentMatrix, bank: MemoryBank,
                         mode: str = "convex") -> Tensor:
    """(K, d) component tokens aggregated from strokes and keys."""
    if mode not in COMPONENT_FUSION_MODES:
        raise ValueError(f"unknown component fusion mode {mode!r}")
    ctq = assignment.C.T @ q
    if mode == "strokes_only":
        return ctq
    k = assignment.n_components
    g, _ = max_reduce(assignment.C, axis=0)  # per-component max over strokes
    g = g.reshape(k, 1)
    majority = _majority_heads(assignment, bank)
    kbar = take_rows(bank.flat_keys(), np.arange(k) * bank.n_heads + majority)
    return (1.0 - g) * ctq + g * kbar


def key_classifier_loss(bank: MemoryBank, w1: Parameter, b1: Parameter) -> Tensor:
    """Cross-entropy of a linear head classifying every key to its
    component index, averaged over all K*H stored vectors."""
    logits = bank.flat_keys() @ w1 + b1
    targets = np.repeat(np.arange(bank.n_components), bank.n_heads)
    return cross_entropy(logits, targets)


def assignment_loss(c: Tensor, c_gt: np.ndarray) -> Tensor:
    """Balanced binary cross-entropy between the soft assignment and the
    one-hot ground-truth assignment."""
    c_gt = np.asarray(c_gt, dtype=np.float64)
    if c_gt.shape != c.data.shape:
        raise ValueError(
            f"ground-truth assignment shape {c_gt.shape} != {c.data.shape}"
        )
    if not np.all((c_gt == 0.0) | (c_gt == 1.0)) or not np.all(c_gt.sum(axis=1) == 1.0):
        raise ValueError("ground-truth assignment must be one-hot per row")
    return balanced_binary_ce(c, c_gt)


def one_hot_assignment(stroke_components, n_components: int) -> np.ndarray:
    labels = np.asarray(stroke_components, dtype=np.int64)
    gt = np.zeros((labels.size, n_components))
    gt[np.arange(labels.size), labels] = 1.0
    return gt
