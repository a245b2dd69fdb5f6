"""Recognition and segmentation metrics."""

from __future__ import annotations

from typing import List, Sequence


def acc_at_1(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Fraction of samples whose top predicted category is correct."""
    if len(predictions) != len(labels):
        raise ValueError(f"{len(predictions)} predictions vs {len(labels)} labels")
    if len(labels) == 0:
        raise ValueError("cannot score an empty sample set")
    correct = sum(1 for p, y in zip(predictions, labels) if p == y)
    return correct / len(labels)


def c_metric(stroke_predictions: Sequence[Sequence[int]],
             stroke_labels: Sequence[Sequence[int]]) -> float:
    """Fraction of strokes labeled correctly, pooled over the dataset."""
    if len(stroke_predictions) != len(stroke_labels):
        raise ValueError(
            f"{len(stroke_predictions)} prediction lists vs {len(stroke_labels)} label lists"
        )
    correct = 0
    total = 0
    for preds, labels in zip(stroke_predictions, stroke_labels):
        if len(preds) != len(labels):
            raise ValueError(f"stroke count mismatch: {len(preds)} vs {len(labels)}")
        correct += sum(1 for p, y in zip(preds, labels) if p == y)
        total += len(labels)
    if total == 0:
        raise ValueError("cannot score zero strokes")
    return correct / total
