"""Training/evaluation driver: run configs, the epoch loop, metric
logging, checkpoint selection, the ablation sweep, and feature export."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import AdamConfig, adam_step, backward, zero_grads
from .data import Dataset, LabelSpace, load_stroke_file
from .metrics import acc_at_1, c_metric
from .model import DIMS_PRESETS, ModelDims, SketchRecognizer, ScenarioConfig
from .synthetic import SynthSpec, synthesize_dataset


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class RunConfig:
    train_path: str = ""
    test_path: str = ""
    label_space_path: str = ""
    scenario: str = "labels_full"
    fusion_mode: str = "convex"
    token_path: str = ""
    preset: str = "desk"
    seed: int = 0
    epochs: int = 300
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    lambda1: float = 1.0
    lambda2: float = 20.0
    lambda_s: float = 10.0
    lambda_c: float = 10.0
    eval_every: int = 1
    stop_train_acc: float = -1.0       # early stop once all set targets are
    stop_train_c_metric: float = -1.0  # met (negative disables a target)
    stop_train_l4: float = -1.0        # classification-loss ceiling target
    out_dir: str = "runs/out"

    @classmethod
    def full_defaults(cls, **overrides) -> "RunConfig":
        cfg = cls(preset="full", epochs=200, batch_size=128, learning_rate=3e-4)
        for key, value in overrides.items():
            setattr(cfg, key, value)
        return cfg

    def scenario_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            scenario=self.scenario,
            fusion_mode=self.fusion_mode,
            token_path=self.token_path,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            lambda_s=self.lambda_s,
            lambda_c=self.lambda_c,
        )

    def adam(self) -> AdamConfig:
        return AdamConfig(self.learning_rate, self.beta1, self.beta2, self.adam_epsilon)


_FIELD_TYPES = {
    "train_path": str, "test_path": str, "label_space_path": str,
    "scenario": str, "fusion_mode": str, "token_path": str, "preset": str,
    "seed": int, "epochs": int, "batch_size": int,
    "learning_rate": float, "beta1": float, "beta2": float, "adam_epsilon": float,
    "lambda1": float, "lambda2": float, "lambda_s": float, "lambda_c": float,
    "eval_every": int, "stop_train_acc": float, "stop_train_c_metric": float,
    "stop_train_l4": float, "out_dir": str,
}


def parse_key_value_file(path) -> Dict[str, str]:
    """`key = value` lines; blank lines and #-comments ignored."""
    out: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def load_run_config(path) -> RunConfig:
    cfg = RunConfig()
    for key, value in parse_key_value_file(path).items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        setattr(cfg, key, _FIELD_TYPES[key](value))
    return cfg


@dataclass
class EpochRecord:
    epoch: int
    loss: Dict[str, float]
    train_acc: float
    metrics: Dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"epoch": self.epoch, "loss": self.loss, "train_acc": self.train_acc,
             **self.metrics},
            sort_keys=True,
        )


@dataclass
class TrainResult:
    model: SketchRecognizer
    history: List[EpochRecord]
    best_epoch: int
    best_metrics: Dict[str, float]
    checkpoint_path: str
    epochs_run: int


def _load_datasets(config: RunConfig) -> Tuple[Dataset, Optional[Dataset]]:
    label_space = LabelSpace.load(config.label_space_path)
    train = load_stroke_file(config.train_path, label_space, split="train")
    test = None
    if config.test_path:
        test = load_stroke_file(config.test_path, label_space, split="test")
    return train, test


def evaluate_model(model: SketchRecognizer, dataset: Dataset) -> Dict[str, float]:
    """Scenario-appropriate metrics over a dataset."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate an empty dataset")
    if dataset.label_space.to_dict() != model.label_space.to_dict():
        raise ValueError("checkpoint label space does not match the dataset")
    cat_preds: List[int] = []
    cat_true: List[int] = []
    seg_preds: List[List[int]] = []
    seg_true: List[List[int]] = []
    exist_hits = 0
    exist_total = 0
    for sketch in dataset:
        result = model.forward(sketch)
        cat_preds.append(int(np.argmax(result.category_logits.data)))
        cat_true.append(sketch.category)
        if model.scenario.scenario == "labels_full" and sketch.stroke_components is not None:
            seg_preds.append(np.argmax(result.stroke_logits.data, axis=1).tolist())
            seg_true.append(list(sketch.stroke_components))
        if model.scenario.scenario == "prior_info":
            y_e = model.label_space.composition[sketch.category]
            pred = (result.existence_logits.data > 0.0).astype(np.int64)
            exist_hits += int((pred == y_e).sum())
            exist_total += y_e.size
    metrics = {"acc_at_1": acc_at_1(cat_preds, cat_true)}
    if seg_true:
        metrics["c_metric"] = c_metric(seg_preds, seg_true)
    if exist_total:
        metrics["existence_acc"] = exist_hits / exist_total
    return metrics


def train(config: RunConfig, train_set: Optional[Dataset] = None,
          test_set: Optional[Dataset] = None, quiet: bool = False) -> TrainResult:
    """Run the training loop; deterministic under config.seed."""
    if train_set is None:
        train_set, loaded_test = _load_datasets(config)
        if test_set is None:
            test_set = loaded_test
    label_space = train_set.label_space
    dims = DIMS_PRESETS[config.preset]
    model = SketchRecognizer(label_space, dims, config.scenario_config(), seed=config.seed)
    params = model.parameters()
    adam_cfg = config.adam()
    rng = np.random.default_rng(config.seed + 1)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "metrics.jsonl"
    ckpt_path = out_dir / "best.ckpt"
    history: List[EpochRecord] = []
    best_acc = -1.0
    best_epoch = -1
    best_metrics: Dict[str, float] = {}
    needs_seg = config.scenario == "labels_full"

    with open(log_path, "w", encoding="utf-8") as log:
        for epoch in range(config.epochs):
            order = rng.permutation(len(train_set.samples))
            part_sums: Dict[str, float] = {}
            n_batches = 0
            epoch_cat_pred: List[int] = []
            epoch_cat_true: List[int] = []
            epoch_seg_pred: List[List[int]] = []
            epoch_seg_true: List[List[int]] = []
            for start in range(0, len(order), config.batch_size):
                batch = [train_set.samples[i] for i in order[start:start + config.batch_size]]
                zero_grads(params)
                parts_list = []
                for sketch in batch:
                    result = model.forward(sketch)
                    epoch_cat_pred.append(int(np.argmax(result.category_logits.data)))
                    epoch_cat_true.append(sketch.category)
                    if needs_seg:
                        epoch_seg_pred.append(
                            np.argmax(result.stroke_logits.data, axis=1).tolist()
                        )
                        epoch_seg_true.append(list(sketch.stroke_components))
                    parts_list.append(model.sketch_losses(sketch, result))
                scale = 1.0 / len(batch)
                tensor_parts = {}
                for name in parts_list[0]:
                    summed = parts_list[0][name]
                    for sk_parts in parts_list[1:]:
                        summed = summed + sk_parts[name]
                    tensor_parts[name] = summed * scale
                tensor_parts["L1"] = model.key_loss()
                total = model.total_loss(tensor_parts)
                total_val = total.item()
                if not np.isfinite(total_val):
                    dump = out_dir / "nan_batch.json"
                    with open(dump, "w", encoding="utf-8") as fh:
                        json.dump(
                            {
                                "epoch": epoch,
                                "parts": {k: v.item() for k, v in tensor_parts.items()},
                                "batch": [
                                    {
                                        "category": sk.category,
                                        "strokes": [s.points.tolist() for s in sk.strokes],
                                        "stroke_components": sk.stroke_components,
                                    }
                                    for sk in batch
                                ],
                            },
                            fh,
                        )
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch}; offending batch dumped to {dump}"
                    )
                backward(total)
                adam_step(params, adam_cfg)
                for name, value in tensor_parts.items():
                    part_sums[name] = part_sums.get(name, 0.0) + value.item()
                n_batches += 1

            loss_log = {name: part_sums[name] / n_batches for name in sorted(part_sums)}
            # recombine the logged total from the logged means so the
            # bookkeeping identity holds exactly in the written record
            loss_log["total"] = _recombine(loss_log, model.scenario)
            train_acc = acc_at_1(epoch_cat_pred, epoch_cat_true)
            record = EpochRecord(epoch=epoch, loss=loss_log, train_acc=train_acc)
            if needs_seg:
                record.metrics["train_c_metric"] = c_metric(epoch_seg_pred, epoch_seg_true)
            if test_set is not None and (epoch % config.eval_every == 0
                                         or epoch == config.epochs - 1):
                test_metrics = evaluate_model(model, test_set)
                record.metrics.update({f"test_{k}": v for k, v in test_metrics.items()})
                if test_metrics["acc_at_1"] >= best_acc:
                    best_acc = test_metrics["acc_at_1"]
                    best_epoch = epoch
                    best_metrics = dict(test_metrics)
                    model.save(ckpt_path)
            history.append(record)
            log.write(record.to_json() + "\n")
            log.flush()
            if not quiet:
                print(f"epoch {epoch}: {record.to_json()}")
            if _hit_targets(config, record):
                break

    if best_epoch < 0:
        model.save(ckpt_path)
        best_epoch = history[-1].epoch if history else 0
        best_metrics = {}
    return TrainResult(
        model=model, history=history, best_epoch=best_epoch,
        best_metrics=best_metrics, checkpoint_path=str(ckpt_path),
        epochs_run=len(history),
    )


def _hit_targets(config: RunConfig, record: EpochRecord) -> bool:
    if config.stop_train_acc < 0:
        return False
    if record.train_acc < config.stop_train_acc:
        return False
    if config.stop_train_c_metric >= 0:
        cm = record.metrics.get("train_c_metric")
        if cm is None or cm < config.stop_train_c_metric:
            return False
    if config.stop_train_l4 >= 0 and record.loss["L4"] > config.stop_train_l4:
        return False
    return True


def _recombine(loss_log: Dict[str, float], scenario: ScenarioConfig) -> float:
    # canonical left-to-right order L1, L2, L4, L5, L6 so any reader
    # recombining the logged parts reproduces the total bit-for-bit
    total = scenario.lambda1 * loss_log["L1"]
    if "L2" in loss_log:
        total = total + scenario.lambda2 * loss_log["L2"]
    total = total + loss_log["L4"]
    if "L5" in loss_log:
        total = total + scenario.lambda_s * loss_log["L5"]
    if "L6" in loss_log:
        total = total + scenario.lambda_c * loss_log["L6"]
    return total


# -- ablation sweep -----------------------------------------------------------

SWEEP_ROWS = [
    # (label, scenario, token_path, fusion_mode)
    ("c_only_stroke_convex", "category_only", "stroke", "convex"),
    ("c_only_stroke_keys", "category_only", "stroke", "keys_only"),
    ("c_only_stroke_q", "category_only", "stroke", "strokes_only"),
    ("c_only_component_convex", "category_only", "component", "convex"),
    ("c_only_component_ctq", "category_only", "component", "strokes_only"),
    ("prior_component_convex", "prior_info", "component", "convex"),
    ("prior_component_ctq", "prior_info", "component", "strokes_only"),
    ("full_stroke_convex", "labels_full", "stroke", "convex"),
    ("full_stroke_keys", "labels_full", "stroke", "keys_only"),
    ("full_stroke_q", "labels_full", "stroke", "strokes_only"),
]


def sweep(config: RunConfig, train_set: Optional[Dataset] = None,
          test_set: Optional[Dataset] = None, quiet: bool = True) -> List[dict]:
    """Train every fusion/supervision configuration; one metrics row each."""
    if train_set is None:
        train_set, loaded_test = _load_datasets(config)
        if test_set is None:
            test_set = loaded_test
    rows = []
    base_out = Path(config.out_dir)
    for label, scenario, token_path, fusion in SWEEP_ROWS:
        run_cfg = RunConfig(**{**asdict(config)})
        run_cfg.scenario = scenario
        run_cfg.token_path = token_path
        run_cfg.fusion_mode = fusion
        run_cfg.out_dir = str(base_out / label)
        result = train(run_cfg, train_set=train_set, test_set=test_set, quiet=quiet)
        final = result.history[-1]
        row = {
            "config": label,
            "scenario": scenario,
            "token_path": token_path,
            "fusion_mode": fusion,
            "epochs_run": result.epochs_run,
            "train_acc": final.train_acc,
            **{k: v for k, v in final.metrics.items()},
            **{f"best_{k}": v for k, v in result.best_metrics.items()},
        }
        rows.append(row)
    header = sorted({key for row in rows for key in row})
    table = base_out / "sweep.csv"
    base_out.mkdir(parents=True, exist_ok=True)
    with open(table, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row.get(k, "")) for k in header) + "\n")
    return rows


# -- feature export ------------------------------------------------------------


def export_features(model: SketchRecognizer, dataset: Dataset, out_dir) -> str:
    """Dump per-stroke features, assignments, labels, and all memory keys
    as tab-separated text; returns the file path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "features.tsv"
    k, h = model.bank.n_components, model.bank.n_heads
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# kind\ta\tb\ttrue\tpred\tfeature...\tassignment...\n")
        for si, sketch in enumerate(dataset):
            result = model.forward(sketch)
            if result.stroke_logits is not None:
                preds = np.argmax(result.stroke_logits.data, axis=1)
            else:
                preds = np.argmax(result.assignment.C.data, axis=1)
            for row in range(len(sketch)):
                true = (-1 if sketch.stroke_components is None
                        else sketch.stroke_components[row])
                cells = ["stroke", str(si), str(row), str(true), str(int(preds[row]))]
                cells += [repr(float(v)) for v in result.q.data[row]]
                cells += [repr(float(v)) for v in result.assignment.C.data[row]]
                fh.write("\t".join(cells) + "\n")
        keys = model.bank.keys.data
        for j in range(k):
            for head in range(h):
                cells = ["key", str(j), str(head), str(j), str(j)]
                cells += [repr(float(v)) for v in keys[j, head]]
                fh.write("\t".join(cells) + "\n")
    return str(path)


def read_feature_dump(path) -> List[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cells = line.rstrip("\n").split("\t")
            kind, a, b, true, pred = cells[:5]
            values = [float(v) for v in cells[5:]]
            rows.append(
                {"kind": kind, "a": int(a), "b": int(b), "true": int(true),
                 "pred": int(pred), "values": values}
            )
    return rows
