"""Two-component Gaussian mixture over the embedding cloud.

Covariances are diagonal: at embedding widths in the thousands a full
covariance is quadratic storage and rank-deficient at corpus scale, so the
per-dimension variant is the feasible choice. All densities are evaluated
in log space (log-sum-exp) so the model survives very high dimensions.

Fitting is plain EM with deterministic farthest-pair seeding: the component
means start at the two rows realizing the maximum pairwise distance within
a subsample chosen by a data statistic (distance from the global mean), so
the result does not depend on row order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GmmError
from .parallel import map_blocks

_LOG_2PI = math.log(2.0 * math.pi)

INIT_SAMPLE_ROWS = 1024


@dataclass
class EmConfig:
    """Fitting knobs; defaults are safe for embedding-scale data."""

    max_iters: int = 200
    rel_tol: float = 1e-6
    seed: int = 0
    variance_floor: float = 1e-6

    def validate(self) -> None:
        if self.max_iters < 1:
            raise GmmError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise GmmError("rel_tol must be > 0")
        if not self.variance_floor > 0:
            raise GmmError("variance_floor must be > 0")


@dataclass
class GmmModel:
    """Mixing weight, two means, and two diagonal covariances."""

    mix: float
    mean1: np.ndarray
    mean2: np.ndarray
    var1: np.ndarray
    var2: np.ndarray
    dim: int

    def validate(self) -> None:
        if not 0.0 < self.mix < 1.0:
            raise GmmError(f"mix must lie in (0, 1), got {self.mix}")
        for name, arr in (
            ("mean1", self.mean1),
            ("mean2", self.mean2),
            ("var1", self.var1),
            ("var2", self.var2),
        ):
            if arr.shape != (self.dim,):
                raise GmmError(f"{name} must have shape ({self.dim},)")
            if not np.isfinite(arr).all():
                raise GmmError(f"{name} contains non-finite values")
        if (self.var1 <= 0).any() or (self.var2 <= 0).any():
            raise GmmError("variances must be strictly positive")


def save_model(model: GmmModel, path: str | Path) -> None:
    doc = {
        "mix": model.mix,
        "mean1": model.mean1.tolist(),
        "mean2": model.mean2.tolist(),
        "var1": model.var1.tolist(),
        "var2": model.var2.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str | Path) -> GmmModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GmmError(f"{path}: invalid model JSON ({exc.msg})") from exc
    try:
        model = GmmModel(
            mix=float(doc["mix"]),
            mean1=np.asarray(doc["mean1"], dtype=np.float64),
            mean2=np.asarray(doc["mean2"], dtype=np.float64),
            var1=np.asarray(doc["var1"], dtype=np.float64),
            var2=np.asarray(doc["var2"], dtype=np.float64),
            dim=len(doc["mean1"]),
        )
    except KeyError as exc:
        raise GmmError(f"{path}: model document missing key {exc}") from exc
    model.validate()
    return model


def _diag_log_density(rows: np.ndarray, mean: np.ndarray, var: np.ndarray) -> np.ndarray:
    """log N(x | mean, diag(var)) for each row, fully in log space."""
    const = -0.5 * (rows.shape[1] * _LOG_2PI + np.log(var).sum())
    diff = rows - mean
    return const - 0.5 * ((diff * diff) / var).sum(axis=1)


def _weighted_log_densities(model: GmmModel, rows: np.ndarray):
    w1 = math.log(model.mix) + _diag_log_density(rows, model.mean1, model.var1)
    w2 = math.log1p(-model.mix) + _diag_log_density(rows, model.mean2, model.var2)
    return w1, w2


def _logsumexp_pair(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    m = np.maximum(w1, w2)
    return m + np.log(np.exp(w1 - m) + np.exp(w2 - m))


def log_likelihood(model: GmmModel, point: np.ndarray) -> float:
    """log[pi N(x|mu1,S1) + (1-pi) N(x|mu2,S2)] via log-sum-exp."""
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (model.dim,):
        raise GmmError(f"dimension mismatch: point has {point.shape}, model dim {model.dim}")
    w1, w2 = _weighted_log_densities(model, point.reshape(1, -1))
    return float(_logsumexp_pair(w1, w2)[0])


def log_likelihood_rows(model: GmmModel, rows: np.ndarray, threads: int = 1) -> np.ndarray:
    """Per-row mixture log-likelihood for an N x d matrix."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.dim:
        raise GmmError(
            f"dimension mismatch: rows have shape {rows.shape}, model dim {model.dim}"
        )
    if rows.shape[0] == 0:
        return np.zeros(0)

    def block(start: int, stop: int) -> np.ndarray:
        w1, w2 = _weighted_log_densities(model, rows[start:stop])
        return _logsumexp_pair(w1, w2)

    return np.concatenate(map_blocks(block, rows.shape[0], threads))


def responsibilities(model: GmmModel, point: np.ndarray) -> tuple[float, float]:
    """Posterior component weights (gamma1, gamma2); they sum to one."""
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (model.dim,):
        raise GmmError(f"dimension mismatch: point has {point.shape}, model dim {model.dim}")
    w1, w2 = _weighted_log_densities(model, point.reshape(1, -1))
    m = max(w1[0], w2[0])
    e1 = math.exp(w1[0] - m)
    e2 = math.exp(w2[0] - m)
    total = e1 + e2
    return e1 / total, e2 / total


@dataclass
class EmFitResult:
    """Fitted model plus the per-iteration total log-likelihood trace."""

    model: GmmModel
    log_likelihoods: list[float]
    iterations: int
    converged: bool


def _initial_model(x: np.ndarray, floor: float) -> GmmModel:
    n, d = x.shape
    if n > INIT_SAMPLE_ROWS:
        # subsample by a row-order-free statistic: farthest from the mean
        center = x.mean(axis=0)
        dist = ((x - center) ** 2).sum(axis=1)
        keep = np.argsort(-dist, kind="stable")[:INIT_SAMPLE_ROWS]
        sample = x[np.sort(keep)]
    else:
        sample = x
    sq = (sample * sample).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (sample @ sample.T)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    global_var = np.maximum(x.var(axis=0), floor)
    return GmmModel(
        mix=0.5,
        mean1=sample[i].astype(np.float64),
        mean2=sample[j].astype(np.float64),
        var1=global_var.copy(),
        var2=global_var.copy(),
        dim=d,
    )


_MIX_CLAMP = 1e-10


def em_fit(embeddings: np.ndarray, config: EmConfig | None = None, threads: int = 1) -> EmFitResult:
    """Run EM to convergence, returning the model and its likelihood trace.

    The E-step runs as a map over fixed row blocks with partial sums
    combined in block order, so the result is identical for any thread
    count. Per-iteration total log-likelihood is non-decreasing up to a
    1e-9 slack (the variance floor is a projection, not a free M-step).
    """
    config = config or EmConfig()
    config.validate()
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2:
        raise GmmError("embeddings must be a 2-d matrix")
    n, d = x.shape
    if n < 2:
        raise GmmError(f"need at least 2 rows to fit, got {n}")
    finite_rows = np.isfinite(x).all(axis=1)
    if not finite_rows.all():
        raise GmmError(f"non-finite input at row {int(np.argmin(finite_rows))}")
    if np.all(x == x[0]):
        raise GmmError("zero-variance corpus: all points identical")

    model = _initial_model(x, config.variance_floor)
    trace: list[float] = []
    converged = False
    iterations = 0

    for _ in range(config.max_iters):
        iterations += 1

        def block(start: int, stop: int):
            rows = x[start:stop]
            w1, w2 = _weighted_log_densities(model, rows)
            ll_rows = _logsumexp_pair(w1, w2)
            g1 = np.exp(w1 - ll_rows)
            g2 = np.exp(w2 - ll_rows)
            return (
                float(ll_rows.sum()),
                float(g1.sum()),
                float(g2.sum()),
                g1 @ rows,
                g2 @ rows,
                g1 @ (rows * rows),
                g2 @ (rows * rows),
            )

        parts = map_blocks(block, n, threads)
        total_ll = 0.0
        n1 = n2 = 0.0
        s1 = np.zeros(d)
        s2 = np.zeros(d)
        q1 = np.zeros(d)
        q2 = np.zeros(d)
        for ll_b, n1_b, n2_b, s1_b, s2_b, q1_b, q2_b in parts:
            total_ll += ll_b
            n1 += n1_b
            n2 += n2_b
            s1 += s1_b
            s2 += s2_b
            q1 += q1_b
            q2 += q2_b
        trace.append(total_ll)

        if len(trace) >= 2:
            prev = trace[-2]
            if total_ll - prev < config.rel_tol * abs(prev):
                converged = True
                break

        n1 = max(n1, _MIX_CLAMP)
        n2 = max(n2, _MIX_CLAMP)
        mean1 = s1 / n1
        mean2 = s2 / n2
        var1 = np.maximum(q1 / n1 - mean1 * mean1, config.variance_floor)
        var2 = np.maximum(q2 / n2 - mean2 * mean2, config.variance_floor)
        mix = min(max(n1 / (n1 + n2), _MIX_CLAMP), 1.0 - _MIX_CLAMP)
        model = GmmModel(mix=mix, mean1=mean1, mean2=mean2, var1=var1, var2=var2, dim=d)

    model.validate()
    return EmFitResult(model=model, log_likelihoods=trace, iterations=iterations, converged=converged)


def fit_gmm(embeddings: np.ndarray, config: EmConfig | None = None, threads: int = 1) -> GmmModel:
    """Fit the mixture; deterministic for identical inputs and config."""
    return em_fit(embeddings, config, threads).model
