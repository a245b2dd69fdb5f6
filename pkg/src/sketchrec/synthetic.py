"""Synthetic sketch generator for desk-scale experiments.

Each component type gets a stroke archetype (line / arc / zigzag / loop)
at a canonical placement on a grid; a category is a fixed set of
component types drawn in a fixed layout. Samples add coordinate jitter
and shuffle stroke order within each component, and every stroke carries
its component label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .data import DataError, Dataset, LabelSpace, Sketch, Stroke, normalize

ARCHETYPE_KINDS = ("line", "arc", "zigzag", "loop")


@dataclass
class SynthSpec:
    n_categories: int = 5
    n_components: int = 8
    samples_per_category: int = 50
    test_samples_per_category: int = 0
    jitter: float = 0.01
    points_per_stroke: int = 12
    components_per_category: int = 3
    # category -> list of component ids; filled deterministically if empty
    category_components: Dict[int, List[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.category_components:
            self.category_components = _default_compositions(
                self.n_categories, self.n_components, self.components_per_category
            )
        for cid in range(self.n_categories):
            comps = self.category_components.get(cid, [])
            if len(comps) == 0:
                raise DataError(f"category {cid} has no components")
            for j in comps:
                if not 0 <= j < self.n_components:
                    raise DataError(f"category {cid} references component {j}")

    @classmethod
    def from_mapping(cls, kv: Dict[str, str]) -> "SynthSpec":
        fields = {
            "n_categories": int,
            "n_components": int,
            "samples_per_category": int,
            "test_samples_per_category": int,
            "jitter": float,
            "points_per_stroke": int,
            "components_per_category": int,
        }
        kwargs = {}
        for key, value in kv.items():
            if key not in fields:
                raise DataError(f"unknown synth spec key {key!r}")
            kwargs[key] = fields[key](value)
        return cls(**kwargs)


def _default_compositions(n_categories: int, n_components: int,
                          size: int) -> Dict[int, List[int]]:
    """Deterministic pairwise-distinct component subsets, spread so every
    component appears in at least one category when possible."""
    size = min(size, n_components)
    combos = list(combinations(range(n_components), size))
    if n_categories > len(combos):
        raise DataError(
            f"cannot build {n_categories} distinct categories from "
            f"{n_components} components choose {size}"
        )
    # evenly spaced picks are pairwise distinct since (n-1)*step < len
    step = max(1, len(combos) // n_categories)
    return {i: list(combos[i * step]) for i in range(n_categories)}


def _archetype_points(component_id: int, n_components: int, n_points: int) -> List[np.ndarray]:
    """Canonical stroke point runs for one component type (may be >1 stroke)."""
    kind = ARCHETYPE_KINDS[component_id % len(ARCHETYPE_KINDS)]
    grid = max(2, int(np.ceil(np.sqrt(n_components))))
    cell = 1.0 / grid
    cx = (component_id % grid + 0.5) * cell
    cy = (component_id // grid + 0.5) * cell
    r = 0.38 * cell
    t = np.linspace(0.0, 1.0, n_points)
    angle = (component_id * 0.9) % np.pi
    if kind == "line":
        dx, dy = np.cos(angle), np.sin(angle)
        pts = np.stack([cx + r * dx * (2 * t - 1), cy + r * dy * (2 * t - 1)], axis=1)
        return [pts]
    if kind == "arc":
        theta = angle + np.pi * t
        pts = np.stack([cx + r * np.cos(theta), cy + r * np.sin(theta)], axis=1)
        return [pts]
    if kind == "zigzag":
        # drawn as two strokes so within-component order shuffling matters
        half = max(3, n_points // 2)
        u = np.linspace(0.0, 1.0, half)
        left = np.stack(
            [cx - r + r * u, cy + r * (2 * np.abs(u - 0.5) * 2 - 1)], axis=1
        )
        right = np.stack(
            [cx + r * u, cy - r * (2 * np.abs(u - 0.5) * 2 - 1)], axis=1
        )
        return [left, right]
    # loop
    theta = 2.0 * np.pi * t
    pts = np.stack([cx + r * np.cos(theta), cy + r * np.sin(theta)], axis=1)
    return [pts]


def synth_label_space(spec: SynthSpec) -> LabelSpace:
    cats = [f"cat{i}" for i in range(spec.n_categories)]
    comps = [
        f"{ARCHETYPE_KINDS[j % len(ARCHETYPE_KINDS)]}{j}"
        for j in range(spec.n_components)
    ]
    table = np.zeros((spec.n_categories, spec.n_components), dtype=np.int64)
    for cid, members in spec.category_components.items():
        for j in members:
            table[cid, j] = 1
    return LabelSpace(cats, comps, table)


def _make_sketch(spec: SynthSpec, cid: int, rng: np.random.Generator,
                 label_space: LabelSpace) -> Sketch:
    strokes: List[Stroke] = []
    labels: List[int] = []
    for j in sorted(spec.category_components[cid]):
        runs = _archetype_points(j, spec.n_components, spec.points_per_stroke)
        order = rng.permutation(len(runs))
        for idx in order:
            pts = runs[idx] + rng.normal(scale=spec.jitter, size=runs[idx].shape)
            strokes.append(Stroke(pts))
            labels.append(j)
    return normalize(Sketch(strokes, cid, labels))


def synthesize_dataset(spec: SynthSpec, seed: int) -> Tuple[Dataset, Optional[Dataset]]:
    """Deterministic-under-seed labeled dataset (train, optional test)."""
    label_space = synth_label_space(spec)
    rng = np.random.default_rng(seed)
    train = [
        _make_sketch(spec, cid, rng, label_space)
        for cid in range(spec.n_categories)
        for _ in range(spec.samples_per_category)
    ]
    test = None
    if spec.test_samples_per_category > 0:
        test_samples = [
            _make_sketch(spec, cid, rng, label_space)
            for cid in range(spec.n_categories)
            for _ in range(spec.test_samples_per_category)
        ]
        test = Dataset(test_samples, label_space, split="test")
    return Dataset(train, label_space, split="train"), test
