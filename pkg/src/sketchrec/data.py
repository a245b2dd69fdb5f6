"""Sketch data model, normalization, label spaces, and file ingestion.

A sketch is an ordered list of strokes; each stroke is an ordered run of
2-D points with a derived 2-bit pen state (touching on every point but
the last, lifting on the last). Files are newline-delimited JSON records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np


class DataError(ValueError):
    """Malformed or inconsistent sketch data."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    lifting: bool = False

    @property
    def pen_state(self):
        # one-hot (touching, lifting)
        return (0.0, 1.0) if self.lifting else (1.0, 0.0)


class Stroke:
    """An ordered pen-down-to-pen-up run of points."""

    __slots__ = ("points",)

    def __init__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise DataError(f"stroke needs a (k>=1, 2) point array, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("stroke contains non-finite coordinates")
        self.points = arr

    def __len__(self):
        return self.points.shape[0]

    def point_objects(self) -> List[Point]:
        k = len(self)
        return [
            Point(float(x), float(y), lifting=(i == k - 1))
            for i, (x, y) in enumerate(self.points)
        ]

    def feature_array(self) -> np.ndarray:
        """(k, 4) array of x, y, touching, lifting."""
        k = len(self)
        feats = np.zeros((k, 4))
        feats[:, :2] = self.points
        feats[:, 2] = 1.0
        feats[k - 1, 2] = 0.0
        feats[k - 1, 3] = 1.0
        return feats

    @property
    def first_point(self) -> np.ndarray:
        return self.points[0]


class Sketch:
    __slots__ = ("strokes", "category", "stroke_components")

    def __init__(self, strokes: Sequence[Stroke], category: int,
                 stroke_components: Optional[Sequence[int]] = None):
        if len(strokes) < 1:
            raise DataError("sketch needs at least one stroke")
        self.strokes = list(strokes)
        self.category = int(category)
        if stroke_components is not None:
            stroke_components = [int(c) for c in stroke_components]
            if len(stroke_components) != len(self.strokes):
                raise DataError(
                    f"stroke_components length {len(stroke_components)} != "
                    f"stroke count {len(self.strokes)}"
                )
        self.stroke_components = stroke_components

    def __len__(self):
        return len(self.strokes)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.strokes)

    def all_points(self) -> np.ndarray:
        return np.concatenate([s.points for s in self.strokes], axis=0)


@dataclass
class LabelSpace:
    category_names: List[str]
    component_names: List[str]
    composition: np.ndarray  # (n_categories, K) binary

    def __post_init__(self):
        self.composition = np.asarray(self.composition, dtype=np.int64)
        c, k = len(self.category_names), len(self.component_names)
        if self.composition.shape != (c, k):
            raise DataError(
                f"composition shape {self.composition.shape} != ({c}, {k})"
            )
        if np.any(self.composition.sum(axis=1) < 1):
            raise DataError("every category must contain at least one component")

    @property
    def n_categories(self) -> int:
        return len(self.category_names)

    @property
    def n_components(self) -> int:
        return len(self.component_names)

    def category_id(self, name_or_id) -> int:
        if isinstance(name_or_id, str):
            try:
                return self.category_names.index(name_or_id)
            except ValueError:
                raise DataError(f"unknown category {name_or_id!r}") from None
        cid = int(name_or_id)
        if not 0 <= cid < self.n_categories:
            raise DataError(f"unknown category id {cid}")
        return cid

    def to_dict(self) -> dict:
        return {
            "categories": list(self.category_names),
            "components": list(self.component_names),
            "composition": {
                name: [
                    self.component_names[j]
                    for j in np.flatnonzero(self.composition[i])
                ]
                for i, name in enumerate(self.category_names)
            },
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LabelSpace":
        cats = list(obj["categories"])
        comps = list(obj["components"])
        comp_idx = {n: j for j, n in enumerate(comps)}
        table = np.zeros((len(cats), len(comps)), dtype=np.int64)
        for name, members in obj["composition"].items():
            if name not in cats:
                raise DataError(f"composition references unknown category {name!r}")
            for m in members:
                if m not in comp_idx:
                    raise DataError(f"composition references unknown component {m!r}")
                table[cats.index(name), comp_idx[m]] = 1
        return cls(cats, comps, table)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LabelSpace":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Dataset:
    samples: List[Sketch]
    label_space: LabelSpace
    split: str = "train"

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def composition_vector(label_space: LabelSpace, category) -> np.ndarray:
    """Binary length-K vector of component types the category contains."""
    cid = label_space.category_id(category)
    return label_space.composition[cid].copy()


def normalize(sketch: Sketch) -> Sketch:
    """Scale coordinates uniformly into the unit square.

    The longer bounding-box side spans exactly [0, 1]; the shorter side is
    centered. A degenerate (zero-extent) sketch maps to (0.5, 0.5).
    """
    pts = sketch.all_points()
    if not np.all(np.isfinite(pts)):
        raise DataError("cannot normalize non-finite coordinates")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = hi - lo
    longest = span.max()
    strokes = []
    if longest <= 0.0:
        for s in sketch.strokes:
            strokes.append(Stroke(np.full_like(s.points, 0.5)))
    else:
        scale = 1.0 / longest
        offset = (1.0 - span * scale) / 2.0
        for s in sketch.strokes:
            strokes.append(Stroke((s.points - lo) * scale + offset))
    return Sketch(strokes, sketch.category, sketch.stroke_components)


def _parse_record(obj: dict, label_space: LabelSpace, line_no: int) -> Sketch:
    try:
        category = label_space.category_id(obj["category"])
        strokes = [Stroke(np.asarray(pts, dtype=np.float64)) for pts in obj["strokes"]]
        comps = obj.get("stroke_components")
        sketch = Sketch(strokes, category, comps)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"line {line_no}: {exc}") from None
    if sketch.stroke_components is not None:
        k = label_space.n_components
        bad = [c for c in sketch.stroke_components if not 0 <= c < k]
        if bad:
            raise DataError(f"line {line_no}: unknown component id {bad[0]}")
        support = set(np.flatnonzero(label_space.composition[category]).tolist())
        extra = set(sketch.stroke_components) - support
        if extra:
            raise DataError(
                f"line {line_no}: components {sorted(extra)} are outside the "
                f"composition of category "
                f"{label_space.category_names[category]!r}"
            )
    return sketch


def load_stroke_file(path, label_space: LabelSpace, split: str = "train",
                     max_strokes: Optional[int] = None) -> Dataset:
    """Parse, validate, and normalize a newline-delimited sketch file."""
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {line_no}: malformed record ({exc.msg})") from None
            sketch = _parse_record(obj, label_space, line_no)
            if max_strokes is not None and len(sketch) > max_strokes:
                raise DataError(
                    f"line {line_no}: {len(sketch)} strokes exceeds limit {max_strokes}"
                )
            samples.append(normalize(sketch))
    return Dataset(samples, label_space, split=split)


def save_stroke_file(dataset: Dataset, path):
    with open(path, "w", encoding="utf-8") as fh:
        for sketch in dataset.samples:
            rec = {
                "category": dataset.label_space.category_names[sketch.category],
                "strokes": [s.points.tolist() for s in sketch.strokes],
            }
            if sketch.stroke_components is not None:
                rec["stroke_components"] = list(sketch.stroke_components)
            fh.write(json.dumps(rec) + "\n")


def derive_composition(samples: Sequence[Sketch], n_categories: int,
                       n_components: int) -> np.ndarray:
    """Union of observed components per category, for datasets that ship
    stroke labels but no explicit composition table."""
    table = np.zeros((n_categories, n_components), dtype=np.int64)
    for sk in samples:
        if sk.stroke_components is None:
            continue
        for c in sk.stroke_components:
            table[sk.category, c] = 1
    return table
