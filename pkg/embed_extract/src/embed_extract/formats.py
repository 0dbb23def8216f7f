"""The two interchange formats, implemented against their documented byte
layout so this package interoperates with the sampling toolkit without
importing it.

EMB1: magic bytes "EMB1", u32 little-endian row count, u32 little-endian
column count, then rows*cols IEEE-754 binary32 little-endian values in
row-major order. Metadata JSONL: one object per line with exactly the keys
id, prompt, completion, label.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EMB1_HEADER = struct.Struct("<4sII")
EMB1_MAGIC = b"EMB1"

RECORD_KEYS = {"id", "prompt", "completion", "label"}


class FormatError(ValueError):
    pass


@dataclass
class Record:
    id: str
    prompt: str
    completion: str
    label: bool


def read_records(path: str | Path) -> list[Record]:
    records: list[Record] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or set(obj) != RECORD_KEYS:
                raise FormatError(
                    f"{path}:{lineno}: expected exactly keys id, prompt, completion, label"
                )
            if not isinstance(obj["id"], str) or not obj["id"]:
                raise FormatError(f"{path}:{lineno}: id must be a non-empty string")
            if obj["id"] in seen:
                raise FormatError(f"{path}:{lineno}: duplicate id {obj['id']!r}")
            if not isinstance(obj["prompt"], str) or not obj["prompt"]:
                raise FormatError(f"{path}:{lineno}: prompt must be a non-empty string")
            if not isinstance(obj["completion"], str):
                raise FormatError(f"{path}:{lineno}: completion must be a string")
            if not isinstance(obj["label"], bool):
                raise FormatError(f"{path}:{lineno}: label must be a boolean")
            seen.add(obj["id"])
            records.append(
                Record(id=obj["id"], prompt=obj["prompt"], completion=obj["completion"],
                       label=obj["label"])
            )
    return records


def write_records(records: list[Record], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(
                {"id": r.id, "prompt": r.prompt, "completion": r.completion, "label": r.label},
                ensure_ascii=False,
            ))
            fh.write("\n")


def write_emb1(matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise FormatError("embedding matrix must be 2-d")
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_HEADER.pack(EMB1_MAGIC, rows, cols))
        fh.write(matrix.tobytes())
