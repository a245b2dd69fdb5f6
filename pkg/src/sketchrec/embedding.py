"""Stroke-level embeddings: shape + order + location, summed.

Shape comes from a bidirectional LSTM over the stroke's 4-D points
(coordinates + pen state), pooled as the concatenation of the two final
hidden states and mapped through a linear layer; order is a learnable
per-index table; location is a linear map of the stroke's first point.
"""

from __future__ import annotations

from typing import Iterator, List, Tuple

import numpy as np

from .core import Parameter, Tensor, concat, lstm_final_states, take_rows
from .data import Sketch, Stroke


class EmbeddingParams:
    """Weights for the three stroke descriptors."""

    def __init__(self, d: int, max_strokes: int, rng: np.random.Generator):
        if d % 2 != 0:
            raise ValueError(f"embedding width must be even, got {d}")
        self.d = d
        self.max_strokes = max_strokes
        h = d // 2
        bound = 1.0 / np.sqrt(h)

        def uni(shape):
            return rng.uniform(-bound, bound, size=shape)

        self.fwd_wx = Parameter(uni((4, 4 * h)), "embed.shape.fwd_wx")
        self.fwd_wh = Parameter(uni((h, 4 * h)), "embed.shape.fwd_wh")
        self.fwd_b = Parameter(np.zeros(4 * h), "embed.shape.fwd_b")
        self.bwd_wx = Parameter(uni((4, 4 * h)), "embed.shape.bwd_wx")
        self.bwd_wh = Parameter(uni((h, 4 * h)), "embed.shape.bwd_wh")
        self.bwd_b = Parameter(np.zeros(4 * h), "embed.shape.bwd_b")
        self.out_w = Parameter(rng.normal(scale=0.02, size=(d, d)), "embed.shape.out_w")
        self.out_b = Parameter(np.zeros(d), "embed.shape.out_b")
        self.order_table = Parameter(
            rng.normal(scale=0.02, size=(max_strokes, d)), "embed.order_table"
        )
        self.loc_w = Parameter(rng.normal(scale=0.02, size=(2, d)), "embed.loc_w")
        self.loc_b = Parameter(np.zeros(d), "embed.loc_b")

    def parameters(self) -> Iterator[Parameter]:
        yield from (
            self.fwd_wx, self.fwd_wh, self.fwd_b,
            self.bwd_wx, self.bwd_wh, self.bwd_b,
            self.out_w, self.out_b,
            self.order_table, self.loc_w, self.loc_b,
        )


def _padded_points(strokes: List[Stroke]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pad stroke feature runs to a common length, plus reversed copies."""
    lengths = np.array([len(s) for s in strokes], dtype=np.int64)
    t_max = int(lengths.max())
    fwd = np.zeros((len(strokes), t_max, 4))
    bwd = np.zeros((len(strokes), t_max, 4))
    for i, s in enumerate(strokes):
        feats = s.feature_array()
        fwd[i, : len(s)] = feats
        bwd[i, : len(s)] = feats[::-1]
    return fwd, bwd, lengths


def shape_embed_strokes(strokes: List[Stroke], params: EmbeddingParams) -> Tensor:
    """(n, d) shape embeddings for a batch of strokes."""
    if not strokes:
        raise ValueError("need at least one stroke")
    fwd, bwd, lengths = _padded_points(strokes)
    hf = lstm_final_states(fwd, lengths, params.fwd_wx, params.fwd_wh, params.fwd_b)
    hb = lstm_final_states(bwd, lengths, params.bwd_wx, params.bwd_wh, params.bwd_b)
    return concat([hf, hb], axis=1) @ params.out_w + params.out_b


def shape_embed(stroke: Stroke, params: EmbeddingParams) -> Tensor:
    """d-vector shape embedding of one stroke."""
    return shape_embed_strokes([stroke], params).reshape(params.d)


def order_embed(index: int, params: EmbeddingParams) -> Tensor:
    if not 0 <= index < params.max_strokes:
        raise IndexError(
            f"stroke index {index} outside order table of size {params.max_strokes}"
        )
    return take_rows(params.order_table, [index]).reshape(params.d)


def location_embed(first_point, params: EmbeddingParams) -> Tensor:
    pt = np.asarray(first_point, dtype=np.float64).reshape(1, 2)
    if not np.all(np.isfinite(pt)):
        raise ValueError("non-finite location")
    return (Tensor(pt) @ params.loc_w + params.loc_b).reshape(params.d)


def embed_sketch(sketch: Sketch, params: EmbeddingParams) -> Tensor:
    """(N, d) stroke embeddings: shape + order + location per stroke."""
    n = len(sketch)
    if n > params.max_strokes:
        raise IndexError(
            f"sketch has {n} strokes but the order table holds {params.max_strokes}"
        )
    shape = shape_embed_strokes(sketch.strokes, params)
    order = take_rows(params.order_table, np.arange(n))
    firsts = np.stack([s.first_point for s in sketch.strokes], axis=0)
    location = Tensor(firsts) @ params.loc_w + params.loc_b
    return shape + order + location
