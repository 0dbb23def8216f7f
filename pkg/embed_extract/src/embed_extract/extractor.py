"""Batched last-token embedding extraction.

Each record's prompt and completion are joined by the configured separator
and encoded; the embedding is the final hidden state at the last
non-padding position. Sequences longer than the model context are truncated
from the left (the tail is kept so the last token is genuine) with a
per-record warning. Output row order always equals input line order.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .formats import Record, read_records, write_emb1, write_records


@dataclass
class ExtractConfig:
    model_id: str
    input_jsonl: Path
    out_emb: Path
    out_meta: Path
    batch_size: int = 8
    device: str = "cpu"
    separator: str = "\n"

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class ExtractReport:
    rows: int
    dim: int
    truncated_ids: list[str]
    manifest_path: Path


def _load_encoder(model_id: str, device: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise RuntimeError(f"failed to load encoder {model_id!r}: {exc}") from exc
    model.to(device)
    model.eval()
    return tokenizer, model


def _context_length(tokenizer, model) -> int:
    for attr in ("n_positions", "max_position_embeddings"):
        value = getattr(model.config, attr, None)
        if isinstance(value, int) and value > 0:
            return value
    value = getattr(tokenizer, "model_max_length", None)
    if isinstance(value, int) and 0 < value < 10**9:
        return value
    return 2048


def _encode_batch(model, batch_ids: list[list[int]], pad_id: int, device: str) -> np.ndarray:
    max_len = max(len(ids) for ids in batch_ids)
    input_ids = torch.full((len(batch_ids), max_len), pad_id, dtype=torch.long)
    mask = torch.zeros((len(batch_ids), max_len), dtype=torch.long)
    for row, ids in enumerate(batch_ids):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        mask[row, : len(ids)] = 1
    with torch.no_grad():
        out = model(input_ids=input_ids.to(device), attention_mask=mask.to(device))
    hidden = out.last_hidden_state
    last = mask.sum(dim=1) - 1  # right padding: last non-padding position
    gathered = hidden[torch.arange(hidden.shape[0]), last.to(hidden.device)]
    return gathered.to(torch.float32).cpu().numpy()


def extract_embeddings(config: ExtractConfig) -> ExtractReport:
    """Run the extraction and write EMB1 + JSONL + manifest."""
    config.validate()
    records: list[Record] = read_records(config.input_jsonl)
    tokenizer, model = _load_encoder(config.model_id, config.device)
    context = _context_length(tokenizer, model)
    pad_id = tokenizer.pad_token_id
    if pad_id is None:
        pad_id = tokenizer.eos_token_id if tokenizer.eos_token_id is not None else 0

    token_rows: list[list[int]] = []
    truncated: list[str] = []
    for record in records:
        text = f"{record.prompt}{config.separator}{record.completion}"
        ids = tokenizer.encode(text)
        if len(ids) > context:
            ids = ids[-context:]  # keep the tail: the last token must be real
            truncated.append(record.id)
            warnings.warn(
                f"record {record.id!r} exceeds the model context ({context} tokens); "
                "truncated from the left",
                RuntimeWarning,
                stacklevel=2,
            )
        if not ids:
            ids = [pad_id]
        token_rows.append(ids)

    chunks: list[np.ndarray] = []
    for start in range(0, len(token_rows), config.batch_size):
        batch = token_rows[start : start + config.batch_size]
        chunks.append(_encode_batch(model, batch, pad_id, config.device))
    if chunks:
        matrix = np.concatenate(chunks, axis=0)
    else:
        matrix = np.zeros((0, int(model.config.hidden_size)), dtype=np.float32)

    write_emb1(matrix, config.out_emb)
    write_records(records, config.out_meta)

    input_hash = hashlib.sha256(Path(config.input_jsonl).read_bytes()).hexdigest()
    manifest_path = Path(str(config.out_emb) + ".manifest.json")
    manifest = {
        "model_id": config.model_id,
        "separator": config.separator,
        "dim": int(matrix.shape[1]),
        "rows": int(matrix.shape[0]),
        "input_sha256": input_hash,
        "truncated_records": truncated,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return ExtractReport(
        rows=int(matrix.shape[0]),
        dim=int(matrix.shape[1]),
        truncated_ids=truncated,
        manifest_path=manifest_path,
    )
