"""Stroke-level graph construction and two-layer dynamic graph convolution.

Edges come from sketching-order adjacency plus a dilated k-NN in the
current feature space, recomputed per layer; each layer is an EdgeConv
(max aggregation of an edge MLP over neighbors) with a residual
connection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from .core import Parameter, Tensor, concat, max_reduce, stack, take_rows

# count of k-NN calls that had to clamp because k*dilation exceeded N-1
_clamp_warnings = 0


def clamp_warning_count() -> int:
    return _clamp_warnings


def reset_clamp_warnings():
    global _clamp_warnings
    _clamp_warnings = 0


@dataclass(frozen=True)
class StrokeGraph:
    n_nodes: int
    edges: Tuple[Tuple[int, int], ...]  # directed (src, dst)

    def __post_init__(self):
        for s, d in self.edges:
            if s == d:
                raise ValueError(f"self-loop on node {s}")
            if not (0 <= s < self.n_nodes and 0 <= d < self.n_nodes):
                raise ValueError(f"edge ({s},{d}) outside {self.n_nodes} nodes")


def build_sequential_graph(n: int) -> StrokeGraph:
    """Bidirectional edges between strokes adjacent in drawing order."""
    if n < 1:
        raise ValueError("graph needs at least one node")
    edges = []
    for i in range(n - 1):
        edges.append((i, i + 1))
        edges.append((i + 1, i))
    return StrokeGraph(n, tuple(edges))


def dilated_knn(features: np.ndarray, k: int, dilation: int) -> StrokeGraph:
    """Directed neighbor->node edges from every dilation-th of the
    k*dilation nearest nodes (ranks dilation, 2*dilation, ...).

    When k*dilation exceeds N-1 the available neighbors are stride-sampled
    instead, and a module-level warning counter is bumped.
    """
    global _clamp_warnings
    feats = np.asarray(features, dtype=np.float64)
    n = feats.shape[0]
    if n == 1:
        return StrokeGraph(1, ())
    if k * dilation > n - 1:
        _clamp_warnings += 1
    d2 = (
        (feats * feats).sum(axis=1)[:, None]
        + (feats * feats).sum(axis=1)[None, :]
        - 2.0 * feats @ feats.T
    )
    edges = []
    for i in range(n):
        order = [j for j in np.argsort(d2[i], kind="stable") if j != i]
        picks = order[dilation - 1 :: dilation][:k]
        for j in picks:
            edges.append((int(j), i))
    return StrokeGraph(n, tuple(edges))


def union_graphs(a: StrokeGraph, b: StrokeGraph) -> StrokeGraph:
    if a.n_nodes != b.n_nodes:
        raise ValueError("graphs over different node sets")
    merged = sorted(set(a.edges) | set(b.edges))
    return StrokeGraph(a.n_nodes, tuple(merged))


class EdgeConvLayer:
    """Edge MLP (2d -> d -> d, ReLU hidden) with max aggregation."""

    def __init__(self, d: int, rng: np.random.Generator, name: str):
        self.d = d
        self.w1 = Parameter(rng.normal(scale=0.02, size=(2 * d, d)), f"{name}.w1")
        self.b1 = Parameter(np.zeros(d), f"{name}.b1")
        self.w2 = Parameter(rng.normal(scale=0.02, size=(d, d)), f"{name}.w2")
        self.b2 = Parameter(np.zeros(d), f"{name}.b2")

    def parameters(self) -> Iterator[Parameter]:
        yield from (self.w1, self.b1, self.w2, self.b2)


@dataclass
class GraphConvParams:
    layer1: EdgeConvLayer
    layer2: EdgeConvLayer
    k: int = 4
    dilations: Tuple[int, int] = (1, 2)

    @classmethod
    def build(cls, d: int, rng: np.random.Generator, k: int = 4) -> "GraphConvParams":
        return cls(EdgeConvLayer(d, rng, "graph.layer1"),
                   EdgeConvLayer(d, rng, "graph.layer2"), k=k)

    def parameters(self) -> Iterator[Parameter]:
        yield from self.layer1.parameters()
        yield from self.layer2.parameters()


def edgeconv_layer(features: Tensor, graph: StrokeGraph, layer: EdgeConvLayer) -> Tensor:
    """x_i + max over incoming edges of MLP([x_i, x_j - x_i])."""
    n = features.data.shape[0]
    if graph.n_nodes != n:
        raise ValueError(f"graph has {graph.n_nodes} nodes, features {n} rows")
    if not graph.edges:
        return features
    src = np.array([e[0] for e in graph.edges], dtype=np.int64)
    dst = np.array([e[1] for e in graph.edges], dtype=np.int64)
    xi = take_rows(features, dst)
    xj = take_rows(features, src)
    h = concat([xi, xj - xi], axis=1)
    h = (h @ layer.w1 + layer.b1).relu() @ layer.w2 + layer.b2
    per_node: List[Tensor] = []
    for i in range(n):
        rows = np.flatnonzero(dst == i)
        if rows.size == 0:
            per_node.append(features[i])
        else:
            agg, _ = max_reduce(take_rows(h, rows), axis=0)
            per_node.append(features[i] + agg)
    return stack(per_node, axis=0)


def graph_module(embeddings: Tensor, params: GraphConvParams) -> Tensor:
    """Two dynamic EdgeConv layers; returns the fused stroke features Q."""
    n = embeddings.data.shape[0]
    seq = build_sequential_graph(n)
    g1 = union_graphs(seq, dilated_knn(embeddings.data, params.k, params.dilations[0]))
    x1 = edgeconv_layer(embeddings, g1, params.layer1)
    g2 = dilated_knn(x1.data, params.k, params.dilations[1])
    x2 = edgeconv_layer(x1, g2, params.layer2)
    return x2
