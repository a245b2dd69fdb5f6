"""Self-describing checkpoint container.

Layout: one magic line, a 16-digit header length, a JSON header (format
version, model config echo, label space, tensor directory with shapes and
byte offsets), then raw little-endian float64 row-major tensor data.
"""

from __future__ import annotations

import hashlib
import json
from typing import Dict, Tuple

import numpy as np

MAGIC = b"SKETCHREC-CKPT\n"
FORMAT_VERSION = 1


def save_checkpoint(path, config: dict, label_space_dict: dict,
                    tensors: Dict[str, np.ndarray]):
    names = sorted(tensors)
    directory = []
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
        directory.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size * 8
    header = {
        "format_version": FORMAT_VERSION,
        "config": config,
        "label_space": label_space_dict,
        "tensors": directory,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(b"%016d\n" % len(blob))
        fh.write(blob)
        for name in names:
            fh.write(
                np.ascontiguousarray(tensors[name], dtype="<f8").tobytes()
            )


def load_checkpoint(path) -> Tuple[dict, dict, Dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        length = int(fh.read(17).strip())
        header = json.loads(fh.read(length).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported checkpoint version {header.get('format_version')}"
            )
        data = fh.read()
    tensors: Dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(data, dtype="<f8", count=size, offset=start)
        tensors[entry["name"]] = arr.reshape(shape).astype(np.float64)
    return header["config"], header["label_space"], tensors


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
