"""Full recognizer: embedding -> stroke graph -> component memory ->
transformer, with the per-scenario heads, loss assembly, and the
explanation that accompanies every prediction.

Scenarios:
  labels_full   category + per-stroke component labels; stroke tokens,
                losses L1, L2, L4, L5
  prior_info    category + per-category composition vector; component
                tokens, losses L1, L4, L6
  category_only category labels alone; either token path, losses L1, L4
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import (
    Parameter,
    Tensor,
    backward,
    balanced_binary_ce,
    cross_entropy,
    softmax,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .data import LabelSpace, Sketch
from .embedding import EmbeddingParams, embed_sketch
from .graph import GraphConvParams, graph_module
from .memory import (
    AssignmentMatrix,
    KernelConfig,
    MemoryBank,
    assign,
    assignment_loss,
    fuse_component_level,
    fuse_stroke_level,
    kernel_scores,
    key_classifier_loss,
    one_hot_assignment,
)
from .transformer import TransformerParams, encode

SCENARIOS = ("labels_full", "prior_info", "category_only")


@dataclass
class ModelDims:
    d: int = 64
    n_layers: int = 2
    n_heads: int = 4
    max_strokes: int = 64
    knn_k: int = 4
    memory_heads: int = 4
    tau: float = 1.0
    epsilon: float = 1e-6


DIMS_PRESETS = {
    "desk": ModelDims(),
    "full": ModelDims(d=768, n_layers=12, n_heads=12),
}


@dataclass
class ScenarioConfig:
    scenario: str = "labels_full"
    fusion_mode: str = "convex"
    token_path: str = ""  # stroke | component; defaulted per scenario
    lambda1: float = 1.0
    lambda2: float = 20.0
    lambda_s: float = 10.0
    lambda_c: float = 10.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not self.token_path:
            self.token_path = "component" if self.scenario == "prior_info" else "stroke"
        if self.scenario == "labels_full" and self.token_path != "stroke":
            raise ValueError("labels_full supervises strokes; token_path must be stroke")
        if self.scenario == "prior_info" and self.token_path != "component":
            raise ValueError("prior_info supervises composition; token_path must be component")
        if self.token_path not in ("stroke", "component"):
            raise ValueError(f"unknown token path {self.token_path!r}")


@dataclass
class ForwardResult:
    q: Tensor
    assignment: AssignmentMatrix
    tokens: Tensor
    class_out: Tensor
    token_outs: Tensor
    category_logits: Tensor
    stroke_logits: Optional[Tensor] = None
    existence_logits: Optional[Tensor] = None


class SketchRecognizer:
    def __init__(self, label_space: LabelSpace, dims: ModelDims,
                 scenario: ScenarioConfig, seed: int = 0):
        self.label_space = label_space
        self.dims = dims
        self.scenario = scenario
        rng = np.random.default_rng(seed)
        d = dims.d
        k = label_space.n_components
        self.embedding = EmbeddingParams(d, dims.max_strokes, rng)
        self.graph = GraphConvParams.build(d, rng, k=dims.knn_k)
        self.bank = MemoryBank(k, dims.memory_heads, d, rng)
        self.kernel_cfg = KernelConfig(tau=dims.tau, epsilon=dims.epsilon)
        max_tokens = max(dims.max_strokes, k)
        self.transformer = TransformerParams(
            d, dims.n_layers, dims.n_heads, max_tokens, rng
        )
        self.key_clf_w = Parameter(rng.normal(scale=0.02, size=(d, k)), "memory.classifier_w")
        self.key_clf_b = Parameter(np.zeros(k), "memory.classifier_b")
        self.cat_w = Parameter(
            rng.normal(scale=0.02, size=(d, label_space.n_categories)), "heads.category_w"
        )
        self.cat_b = Parameter(np.zeros(label_space.n_categories), "heads.category_b")
        self.seg_w = Parameter(rng.normal(scale=0.02, size=(d, k)), "heads.segment_w")
        self.seg_b = Parameter(np.zeros(k), "heads.segment_b")
        self.exist_w = Parameter(rng.normal(scale=0.02, size=(d, 1)), "heads.exist_w")
        self.exist_b = Parameter(np.zeros(1), "heads.exist_b")

    # -- parameters ---------------------------------------------------------

    def parameters(self) -> List[Parameter]:
        params = list(self.embedding.parameters())
        params += list(self.graph.parameters())
        params += list(self.bank.parameters())
        params += list(self.transformer.parameters())
        params += [
            self.key_clf_w, self.key_clf_b,
            self.cat_w, self.cat_b,
            self.seg_w, self.seg_b,
            self.exist_w, self.exist_b,
        ]
        return params

    def named_parameters(self) -> Dict[str, Parameter]:
        out = {}
        for p in self.parameters():
            if p.name in out:
                raise ValueError(f"duplicate parameter name {p.name}")
            out[p.name] = p
        return out

    # -- forward ------------------------------------------------------------

    def forward(self, sketch: Sketch) -> ForwardResult:
        emb = embed_sketch(sketch, self.embedding)
        q = graph_module(emb, self.graph)
        scores = kernel_scores(q, self.bank, self.kernel_cfg)
        asg = assign(scores)
        if self.scenario.token_path == "stroke":
            tokens = fuse_stroke_level(q, asg, self.bank, self.scenario.fusion_mode)
        else:
            tokens = fuse_component_level(q, asg, self.bank, self.scenario.fusion_mode)
        class_out, token_outs = encode(tokens, None, self.transformer)
        cat_logits = class_out.reshape(1, self.dims.d) @ self.cat_w + self.cat_b
        result = ForwardResult(
            q=q, assignment=asg, tokens=tokens, class_out=class_out,
            token_outs=token_outs, category_logits=cat_logits.reshape(-1),
        )
        if self.scenario.token_path == "stroke":
            result.stroke_logits = token_outs @ self.seg_w + self.seg_b
        else:
            result.existence_logits = (token_outs @ self.exist_w + self.exist_b).reshape(-1)
        return result

    # -- losses ---------------------------------------------------------------

    def key_loss(self) -> Tensor:
        return key_classifier_loss(self.bank, self.key_clf_w, self.key_clf_b)

    def sketch_losses(self, sketch: Sketch, result: ForwardResult) -> Dict[str, Tensor]:
        """Per-sample loss parts (everything except the key loss L1)."""
        parts: Dict[str, Tensor] = {}
        parts["L4"] = cross_entropy(
            result.category_logits.reshape(1, -1), [sketch.category]
        )
        if self.scenario.scenario == "labels_full":
            if sketch.stroke_components is None:
                raise ValueError("labels_full training requires stroke_components")
            gt = one_hot_assignment(sketch.stroke_components, self.label_space.n_components)
            parts["L2"] = assignment_loss(result.assignment.C, gt)
            parts["L5"] = cross_entropy(result.stroke_logits, sketch.stroke_components)
        elif self.scenario.scenario == "prior_info":
            y_e = self.label_space.composition[sketch.category].astype(np.float64)
            probs = result.existence_logits.sigmoid()
            parts["L6"] = balanced_binary_ce(probs, y_e)
        return parts

    def total_loss(self, parts: Dict[str, Tensor]) -> Tensor:
        """Weighted sum per the scenario's active terms."""
        sc = self.scenario
        total = sc.lambda1 * parts["L1"] + parts["L4"]
        if "L2" in parts:
            total = total + sc.lambda2 * parts["L2"]
        if "L5" in parts:
            total = total + sc.lambda_s * parts["L5"]
        if "L6" in parts:
            total = total + sc.lambda_c * parts["L6"]
        return total

    def batch_loss(self, sketches: Sequence[Sketch]):
        """Mean loss over a batch; returns (total, float parts)."""
        if not sketches:
            raise ValueError("empty batch")
        acc: Dict[str, Tensor] = {}
        for sketch in sketches:
            result = self.forward(sketch)
            for name, value in self.sketch_losses(sketch, result).items():
                acc[name] = value if name not in acc else acc[name] + value
        scale = 1.0 / len(sketches)
        parts: Dict[str, Tensor] = {n: v * scale for n, v in acc.items()}
        parts["L1"] = self.key_loss()
        total = self.total_loss(parts)
        floats = {n: v.item() for n, v in parts.items()}
        return total, floats

    # -- prediction -------------------------------------------------------------

    def predict(self, sketch: Sketch, top_k: Optional[int] = None) -> dict:
        """Ranked categories (all of them unless top_k is given) plus the
        scenario's explanation fields."""
        result = self.forward(sketch)
        probs = softmax(result.category_logits.reshape(1, -1), axis=1).data[0]
        order = np.argsort(-probs, kind="stable")
        if top_k is not None:
            order = order[:top_k]
        names = self.label_space.category_names
        prediction = {
            "categories": [
                {"name": names[i], "p": float(probs[i])} for i in order
            ],
            "assignment": result.assignment.C.data.tolist(),
            "head_choice": result.assignment.head_choice.tolist(),
        }
        comp_names = self.label_space.component_names
        detected: List[int] = []
        if result.stroke_logits is not None and self.scenario.scenario == "labels_full":
            sp = softmax(result.stroke_logits, axis=1).data
            ids = np.argmax(sp, axis=1)
            prediction["stroke_components"] = [
                {"id": int(i), "name": comp_names[int(i)], "p": float(sp[r, i])}
                for r, i in enumerate(ids)
            ]
            detected = sorted(set(int(i) for i in ids))
        elif result.existence_logits is not None:
            ep = _sigmoid_np(result.existence_logits.data)
            prediction["existence"] = [
                {"name": comp_names[j], "p": float(ep[j])} for j in range(len(comp_names))
            ]
            detected = sorted(int(j) for j in np.flatnonzero(ep > 0.5))
        else:
            detected = sorted(set(int(i) for i in np.argmax(result.assignment.C.data, axis=1)))
        top_name = prediction["categories"][0]["name"]
        listed = ", ".join(comp_names[j] for j in detected) if detected else "no clear components"
        prediction["explanation"] = (
            f"Recognized as '{top_name}' because it appears to be composed of: {listed}."
        )
        return prediction

    # -- persistence ---------------------------------------------------------

    def config_dict(self) -> dict:
        return {"dims": asdict(self.dims), "scenario": asdict(self.scenario)}

    def save(self, path):
        tensors = {name: p.data for name, p in self.named_parameters().items()}
        save_checkpoint(path, self.config_dict(), self.label_space.to_dict(), tensors)

    @classmethod
    def load(cls, path) -> "SketchRecognizer":
        config, ls_dict, tensors = load_checkpoint(path)
        label_space = LabelSpace.from_dict(ls_dict)
        dims = ModelDims(**config["dims"])
        scenario = ScenarioConfig(**config["scenario"])
        model = cls(label_space, dims, scenario, seed=0)
        named = model.named_parameters()
        missing = set(named) - set(tensors)
        extra = set(tensors) - set(named)
        if missing or extra:
            raise ValueError(
                f"checkpoint does not match model: missing {sorted(missing)}, "
                f"unexpected {sorted(extra)}"
            )
        for name, p in named.items():
            arr = tensors[name]
            if arr.shape != p.data.shape:
                raise ValueError(
                    f"shape mismatch for {name}: {arr.shape} vs {p.data.shape}"
                )
            p.data = arr.copy()
        return model


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
