"""Deterministic block-parallel helpers.

Work is always split into fixed-size row blocks and the per-block results
are combined in block order, so outputs are bit-identical no matter how
many worker threads run the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

BLOCK_ROWS = 512


def row_spans(n: int, block: int = BLOCK_ROWS) -> list[tuple[int, int]]:
    return [(start, min(start + block, n)) for start in range(0, n, block)]


def map_blocks(
    fn: Callable[[int, int], T], n: int, threads: int = 1, block: int = BLOCK_ROWS
) -> list[T]:
    """Apply ``fn(start, stop)`` over fixed row blocks, results in block order."""
    spans = row_spans(n, block)
    if threads <= 1 or len(spans) <= 1:
        return [fn(start, stop) for start, stop in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda span: fn(*span), spans))
