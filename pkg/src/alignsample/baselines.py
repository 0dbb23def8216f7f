"""Non-LLM baseline samplers: seeded uniform and kernel-density coverage.

Both samplers draw from NumPy's PCG64 generator (``np.random.default_rng``)
so a (seed, input) pair always reproduces the same selection. The density
sampler weights points by inverse kernel density, which steers the draw
toward sparse regions of the embedding cloud. Kernel sums are exact (no
sketching): at desk scale the O(N^2) sum is affordable and testable
against a direct double loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Selection
from .errors import BaselineError
from .parallel import map_blocks

BANDWIDTH_SAMPLE_ROWS = 1024


@dataclass
class DensityScores:
    """Kernel density per point and the inverse-propensity draw weights."""

    density: np.ndarray
    bandwidth: float
    sample_weight: np.ndarray


def select_random(n: int, k: int, seed: int) -> Selection:
    """Uniform draw without replacement: PCG64 permutation, first min(k, n).

    Documented generator contract: ``np.random.default_rng(seed)``
    followed by a single ``permutation(n)``.
    """
    if n < 1:
        raise BaselineError(f"corpus size must be >= 1, got {n}")
    if k < 1:
        raise BaselineError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    take = rng.permutation(n)[: min(k, n)]
    return Selection(
        strategy="random",
        k=k,
        indices=[int(i) for i in take],
        scores=[1.0] * len(take),
        seed=seed,
    )


def _pairwise_sq_dists(block: np.ndarray, rows: np.ndarray) -> np.ndarray:
    sq_b = (block * block).sum(axis=1)
    sq_r = (rows * rows).sum(axis=1)
    d2 = sq_b[:, None] + sq_r[None, :] - 2.0 * (block @ rows.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def median_heuristic_bandwidth(embeddings: np.ndarray, seed: int = 0) -> float:
    """Median pairwise distance over a subsample of at most 1024 rows."""
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    if n > BANDWIDTH_SAMPLE_ROWS:
        rng = np.random.default_rng(seed)
        idx = rng.choice(n, size=BANDWIDTH_SAMPLE_ROWS, replace=False)
        x = x[np.sort(idx)]
        n = BANDWIDTH_SAMPLE_ROWS
    if n < 2:
        return 1.0  # single point: density is the self-term whatever h is
    d2 = _pairwise_sq_dists(x, x)
    upper = d2[np.triu_indices(n, k=1)]
    h = float(np.median(np.sqrt(upper)))
    if h <= 0.0:
        raise BaselineError("degenerate bandwidth: median pairwise distance is zero")
    return h


def density_scores(
    embeddings: np.ndarray,
    bandwidth: float | str = "auto",
    seed: int = 0,
    threads: int = 1,
) -> DensityScores:
    """Gaussian-kernel density per point, including the self-term.

    density[i] = (1/N) * sum_j exp(-||x_i - x_j||^2 / (2 h^2)); draw
    weights are proportional to 1/density and normalized to sum to one.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise BaselineError("embeddings must be a non-empty N x d matrix")
    n = x.shape[0]
    if isinstance(bandwidth, str):
        if bandwidth != "auto":
            raise BaselineError(f"bandwidth must be a positive real or 'auto', got {bandwidth!r}")
        h = median_heuristic_bandwidth(x, seed=seed)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise BaselineError(f"bandwidth must be > 0, got {h}")
    inv = 1.0 / (2.0 * h * h)

    def block(start: int, stop: int) -> np.ndarray:
        d2 = _pairwise_sq_dists(x[start:stop], x)
        return np.exp(-d2 * inv).sum(axis=1) / n

    density = np.concatenate(map_blocks(block, n, threads))
    weight = 1.0 / density
    weight = weight / weight.sum()
    return DensityScores(density=density, bandwidth=h, sample_weight=weight)


def _weighted_draw_without_replacement(
    weights: np.ndarray, k: int, seed: int
) -> list[int]:
    """Sequential draw-and-remove with renormalization.

    Documented generator contract: PCG64(seed); each draw consumes one
    ``rng.random()`` u and picks the first index whose cumulative active
    weight exceeds u * (total active weight).
    """
    rng = np.random.default_rng(seed)
    active = weights.astype(np.float64).copy()
    chosen: list[int] = []
    for _ in range(min(k, len(active))):
        total = active.sum()
        cum = np.cumsum(active)
        u = rng.random() * total
        idx = int(np.searchsorted(cum, u, side="right"))
        idx = min(idx, len(active) - 1)  # guard against u landing on the total
        while active[idx] == 0.0:  # never re-pick an exhausted index
            idx -= 1
        chosen.append(idx)
        active[idx] = 0.0
    return chosen


def select_density(scores: DensityScores, k: int, seed: int) -> Selection:
    """Draw min(k, N) indices with probability proportional to the weights."""
    if k < 1:
        raise BaselineError(f"k must be >= 1, got {k}")
    chosen = _weighted_draw_without_replacement(scores.sample_weight, k, seed)
    return Selection(
        strategy="density",
        k=k,
        indices=chosen,
        scores=[float(scores.sample_weight[i]) for i in chosen],
        seed=seed,
    )


def select_density_topk(scores: DensityScores, k: int) -> Selection:
    """Deterministic variant: the k sparsest points (largest weight) outright."""
    if k < 1:
        raise BaselineError(f"k must be >= 1, got {k}")
    order = np.argsort(-scores.sample_weight, kind="stable")
    take = order[: min(k, len(order))]
    return Selection(
        strategy="density",
        k=k,
        indices=[int(i) for i in take],
        scores=[float(scores.sample_weight[i]) for i in take],
        seed=None,
    )
