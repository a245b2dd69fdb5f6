"""Pre-norm transformer encoder with a learned class token and learned
positional embeddings, in the ViT style. Masked positions neither attend
nor are attended to."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .core import Parameter, Tensor, concat, layer_norm, softmax, take_rows


class EncoderBlock:
    def __init__(self, d: int, n_heads: int, rng: np.random.Generator, name: str):
        if d % n_heads != 0:
            raise ValueError(f"width {d} not divisible by {n_heads} heads")
        self.d = d
        self.n_heads = n_heads
        self.head_dim = d // n_heads

        def lin(shape, label):
            return Parameter(rng.normal(scale=0.02, size=shape), f"{name}.{label}")

        self.wq = lin((d, d), "wq")
        self.wk = lin((d, d), "wk")
        self.wv = lin((d, d), "wv")
        self.wo = lin((d, d), "wo")
        self.bq = Parameter(np.zeros(d), f"{name}.bq")
        self.bk = Parameter(np.zeros(d), f"{name}.bk")
        self.bv = Parameter(np.zeros(d), f"{name}.bv")
        self.bo = Parameter(np.zeros(d), f"{name}.bo")
        self.ln1_g = Parameter(np.ones(d), f"{name}.ln1_g")
        self.ln1_b = Parameter(np.zeros(d), f"{name}.ln1_b")
        self.ln2_g = Parameter(np.ones(d), f"{name}.ln2_g")
        self.ln2_b = Parameter(np.zeros(d), f"{name}.ln2_b")
        self.mlp_w1 = lin((d, 4 * d), "mlp_w1")
        self.mlp_b1 = Parameter(np.zeros(4 * d), f"{name}.mlp_b1")
        self.mlp_w2 = lin((4 * d, d), "mlp_w2")
        self.mlp_b2 = Parameter(np.zeros(d), f"{name}.mlp_b2")

    def parameters(self) -> Iterator[Parameter]:
        yield from (
            self.wq, self.wk, self.wv, self.wo,
            self.bq, self.bk, self.bv, self.bo,
            self.ln1_g, self.ln1_b, self.ln2_g, self.ln2_b,
            self.mlp_w1, self.mlp_b1, self.mlp_w2, self.mlp_b2,
        )

    def __call__(self, x: Tensor, key_mask: np.ndarray) -> Tensor:
        h = layer_norm(x, self.ln1_g, self.ln1_b)
        q = h @ self.wq + self.bq
        k = h @ self.wk + self.bk
        v = h @ self.wv + self.bv
        # additive -inf-style bias zeroes attention to masked keys exactly
        bias = np.where(key_mask, 0.0, -1e9)[None, :]
        heads: List[Tensor] = []
        scale = 1.0 / math.sqrt(self.head_dim)
        for i in range(self.n_heads):
            sl = slice(i * self.head_dim, (i + 1) * self.head_dim)
            qi, ki, vi = q[:, sl], k[:, sl], v[:, sl]
            scores = (qi @ ki.T) * scale + bias
            heads.append(softmax(scores, axis=1) @ vi)
        x = x + concat(heads, axis=1) @ self.wo + self.bo
        h = layer_norm(x, self.ln2_g, self.ln2_b)
        return x + ((h @ self.mlp_w1 + self.mlp_b1).gelu() @ self.mlp_w2 + self.mlp_b2)


@dataclass(frozen=True)
class TransformerPreset:
    d: int
    n_layers: int
    n_heads: int


PRESETS = {
    "full": TransformerPreset(d=768, n_layers=12, n_heads=12),
    "desk": TransformerPreset(d=64, n_layers=2, n_heads=4),
}


class TransformerParams:
    def __init__(self, d: int, n_layers: int, n_heads: int, max_tokens: int,
                 rng: np.random.Generator):
        self.d = d
        self.max_tokens = max_tokens
        self.blocks = [
            EncoderBlock(d, n_heads, rng, f"transformer.block{i}")
            for i in range(n_layers)
        ]
        self.class_token = Parameter(
            rng.normal(scale=0.02, size=(1, d)), "transformer.class_token"
        )
        self.pos_table = Parameter(
            rng.normal(scale=0.02, size=(max_tokens + 1, d)), "transformer.pos_table"
        )
        self.final_ln_g = Parameter(np.ones(d), "transformer.final_ln_g")
        self.final_ln_b = Parameter(np.zeros(d), "transformer.final_ln_b")

    def parameters(self) -> Iterator[Parameter]:
        yield self.class_token
        yield self.pos_table
        for b in self.blocks:
            yield from b.parameters()
        yield self.final_ln_g
        yield self.final_ln_b


def encode(tokens: Tensor, mask: Optional[np.ndarray],
           params: TransformerParams) -> Tuple[Tensor, Tensor]:
    """Run the encoder; returns (class_out, token_outs).

    tokens: (T, d); mask: (T,) booleans, True = real token (None means
    all real). The class token is prepended and always unmasked.
    """
    t = tokens.data.shape[0]
    if t > params.max_tokens:
        raise ValueError(f"{t} tokens exceed the positional table ({params.max_tokens})")
    if mask is None:
        mask = np.ones(t, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (t,):
        raise ValueError(f"mask shape {mask.shape} does not match {t} tokens")
    x = concat([params.class_token, tokens], axis=0)
    x = x + take_rows(params.pos_table, np.arange(t + 1))
    key_mask = np.concatenate([[True], mask])
    for block in params.blocks:
        x = block(x, key_mask)
    x = layer_norm(x, params.final_ln_g, params.final_ln_b)
    return x[0], x[1:]
