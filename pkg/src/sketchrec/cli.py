"""Command-line driver.

Verbs: train, eval, sweep, export, synth, serve. Config files are plain
key = value documents mirroring the run-config fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import LabelSpace, load_stroke_file, save_stroke_file
from .model import SketchRecognizer
from .synthetic import SynthSpec, synthesize_dataset
from .training import (
    evaluate_model,
    export_features,
    load_run_config,
    parse_key_value_file,
    sweep,
    train,
)


def _cmd_train(args) -> int:
    config = load_run_config(args.config)
    result = train(config, quiet=args.quiet)
    summary = {
        "best_epoch": result.best_epoch,
        "best_metrics": result.best_metrics,
        "checkpoint": result.checkpoint_path,
        "epochs_run": result.epochs_run,
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_eval(args) -> int:
    model = SketchRecognizer.load(args.checkpoint)
    dataset = load_stroke_file(args.data, model.label_space, split="test")
    metrics = evaluate_model(model, dataset)
    print(json.dumps(metrics, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    config = load_run_config(args.config)
    rows = sweep(config)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    model = SketchRecognizer.load(args.checkpoint)
    dataset = load_stroke_file(args.data, model.label_space, split="test")
    path = export_features(model, dataset, args.out)
    print(path)
    return 0


def _cmd_synth(args) -> int:
    spec = SynthSpec.from_mapping(parse_key_value_file(args.spec))
    train_set, test_set = synthesize_dataset(spec, seed=args.seed)
    out = Path(args.out)
    save_stroke_file(train_set, out)
    train_set.label_space.save(out.with_suffix(out.suffix + ".labels.json"))
    written = [str(out)]
    if test_set is not None:
        test_path = out.with_suffix(".test" + (out.suffix or ""))
        save_stroke_file(test_set, test_path)
        written.append(str(test_path))
    print(json.dumps({"written": written, "samples": len(train_set)}))
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.checkpoint, args.port, static_dir=args.static)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sketchrec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="run every supervision/fusion configuration")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("export", help="dump features, assignments, and keys")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("serve", help="run the recognition HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    p.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
