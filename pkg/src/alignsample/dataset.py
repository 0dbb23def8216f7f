"""Load, validate, and persist embedded corpora and selection artifacts.

Two file formats make every component interoperable at the byte level:

* Metadata JSONL: one object per line with exactly the keys ``id``,
  ``prompt``, ``completion``, ``label``. Unknown keys are rejected.
* EMB1: magic bytes ``EMB1``, u32 little-endian row count, u32 little-endian
  column count, then rows*cols IEEE-754 binary32 little-endian values in
  row-major order. No padding, no trailer.

A selection is persisted as a single JSON document (see ``write_selection``).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError

EMB1_MAGIC = b"EMB1"
_EMB1_HEADER = struct.Struct("<4sII")

STRATEGIES = ("isa", "random", "density", "llm")

_RECORD_KEYS = {"id", "prompt", "completion", "label"}


@dataclass
class DataRecord:
    """One corpus entry: a prompt/completion pair with a desirability label."""

    id: str
    prompt: str
    completion: str
    label: bool

    def validate(self, where: str = "record") -> None:
        if not isinstance(self.id, str) or not self.id:
            raise DatasetError(f"{where}: id must be a non-empty string")
        if not isinstance(self.prompt, str) or not self.prompt:
            raise DatasetError(f"{where}: prompt must be a non-empty string")
        if not isinstance(self.completion, str):
            raise DatasetError(f"{where}: completion must be a string")
        if not isinstance(self.label, bool):
            raise DatasetError(f"{where}: label must be a boolean")


@dataclass
class EmbeddedDataset:
    """Records plus an aligned N x d embedding matrix (float32, row-major)."""

    records: list[DataRecord]
    embeddings: np.ndarray
    dim: int

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class Selection:
    """An ordered subset of record indices with per-index scores.

    ``scores`` carries strategy-specific values: entropy deltas for isa,
    sampling weights for density, 1.0 markers for random and llm.
    """

    strategy: str
    k: int
    indices: list[int]
    scores: list[float]
    seed: int | None = None

    def validate(self, n: int | None = None) -> None:
        if self.strategy not in STRATEGIES:
            raise DatasetError(f"unknown strategy {self.strategy!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise DatasetError("k must be a positive integer")
        if len(self.indices) != len(self.scores):
            raise DatasetError("indices and scores must have equal length")
        if len(set(self.indices)) != len(self.indices):
            raise DatasetError("selection contains duplicate indices")
        for i in self.indices:
            if not isinstance(i, int) or i < 0:
                raise DatasetError(f"selection index {i!r} is not a non-negative integer")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise DatasetError("seed must be a non-negative integer or None")
        if n is not None:
            if len(self.indices) != min(self.k, n):
                raise DatasetError(
                    f"selection length {len(self.indices)} != min(k={self.k}, N={n})"
                )
            for i in self.indices:
                if i >= n:
                    raise DatasetError(f"selection index {i} out of range for N={n}")


def _parse_record(line: str, lineno: int) -> DataRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"metadata line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise DatasetError(f"metadata line {lineno}: expected an object")
    keys = set(obj)
    if keys != _RECORD_KEYS:
        extra = sorted(keys - _RECORD_KEYS)
        missing = sorted(_RECORD_KEYS - keys)
        parts = []
        if extra:
            parts.append(f"unknown keys {extra}")
        if missing:
            parts.append(f"missing keys {missing}")
        raise DatasetError(f"metadata line {lineno}: " + ", ".join(parts))
    record = DataRecord(
        id=obj["id"], prompt=obj["prompt"], completion=obj["completion"], label=obj["label"]
    )
    record.validate(where=f"metadata line {lineno}")
    return record


def read_metadata(path: str | Path) -> list[DataRecord]:
    """Parse a metadata JSONL file, enforcing the exact-key schema."""
    records: list[DataRecord] = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = _parse_record(line, lineno)
            if record.id in seen:
                raise DatasetError(
                    f"metadata line {lineno}: duplicate id {record.id!r} "
                    f"(first seen on line {seen[record.id]})"
                )
            seen[record.id] = lineno
            records.append(record)
    return records


def write_metadata(records: list[DataRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {"id": r.id, "prompt": r.prompt, "completion": r.completion, "label": r.label},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read an EMB1 file into a float32 row-major matrix (bytes preserved)."""
    raw = Path(path).read_bytes()
    if len(raw) < _EMB1_HEADER.size:
        raise DatasetError(f"{path}: malformed header (file shorter than {_EMB1_HEADER.size} bytes)")
    magic, rows, cols = _EMB1_HEADER.unpack_from(raw, 0)
    if magic != EMB1_MAGIC:
        raise DatasetError(f"{path}: malformed header (bad magic {magic!r})")
    expected = _EMB1_HEADER.size + 4 * rows * cols
    if len(raw) != expected:
        raise DatasetError(
            f"{path}: payload size mismatch (expected {expected} bytes for "
            f"{rows}x{cols}, found {len(raw)})"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_EMB1_HEADER.size)
    return data.reshape(rows, cols).copy()


def write_embeddings(matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise DatasetError("embeddings must be a 2-d matrix")
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_EMB1_HEADER.pack(EMB1_MAGIC, rows, cols))
        fh.write(matrix.tobytes())


def load_dataset(meta_path: str | Path, emb_path: str | Path) -> EmbeddedDataset:
    """Load and cross-validate a JSONL + EMB1 pair.

    Row i of the embedding matrix corresponds to line i of the metadata.
    Every rejection names the offending line or row.
    """
    records = read_metadata(meta_path)
    embeddings = read_embeddings(emb_path)
    rows, cols = embeddings.shape
    if rows != len(records):
        raise DatasetError(f"row-count mismatch (meta={len(records)}, emb={rows})")
    if cols < 1:
        raise DatasetError(f"{emb_path}: embedding dimension must be positive, found {cols}")
    finite_rows = np.isfinite(embeddings).all(axis=1)
    if not finite_rows.all():
        bad = int(np.argmin(finite_rows))
        raise DatasetError(f"non-finite embedding value at row {bad}")
    return EmbeddedDataset(records=records, embeddings=embeddings, dim=cols)


def write_dataset(dataset: EmbeddedDataset, meta_path: str | Path, emb_path: str | Path) -> None:
    """Persist a dataset as a JSONL + EMB1 pair loadable by ``load_dataset``."""
    if dataset.embeddings.shape[0] != len(dataset.records):
        raise DatasetError(
            f"row-count mismatch (meta={len(dataset.records)}, emb={dataset.embeddings.shape[0]})"
        )
    write_metadata(dataset.records, meta_path)
    write_embeddings(dataset.embeddings, emb_path)


def subset_dataset(dataset: EmbeddedDataset, indices: list[int]) -> EmbeddedDataset:
    """A new dataset holding the given rows, in the given order."""
    records = [dataset.records[i] for i in indices]
    embeddings = dataset.embeddings[np.asarray(indices, dtype=np.intp)].copy()
    if embeddings.size == 0:
        embeddings = embeddings.reshape(0, dataset.dim)
    return EmbeddedDataset(records=records, embeddings=embeddings, dim=dataset.dim)


def write_selection(selection: Selection, path: str | Path) -> None:
    """Write the selection JSON document; invalid selections never touch disk."""
    selection.validate()
    for s in selection.scores:
        if not math.isfinite(float(s)):
            raise DatasetError("selection scores must be finite")
    doc = {
        "strategy": selection.strategy,
        "k": selection.k,
        "seed": selection.seed,
        "indices": [int(i) for i in selection.indices],
        "scores": [float(s) for s in selection.scores],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_selection(path: str | Path) -> Selection:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid selection JSON ({exc.msg})") from exc
    for key in ("strategy", "k", "seed", "indices", "scores"):
        if key not in doc:
            raise DatasetError(f"{path}: selection document missing key {key!r}")
    selection = Selection(
        strategy=doc["strategy"],
        k=doc["k"],
        indices=[int(i) for i in doc["indices"]],
        scores=[float(s) for s in doc["scores"]],
        seed=None if doc["seed"] is None else int(doc["seed"]),
    )
    selection.validate()
    return selection
