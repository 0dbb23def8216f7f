"""Exponential-plateau fit of winrate against the percentage of data used.

The curve is R(x) = r - (r - a) * exp(-b x): a is the winrate before any
alignment data, r the plateau, b the growth rate per percentage point
(x runs over 0..100, not 0..1).

Two fitting modes:

* pinned (default): a and r are pinned to the observed x=0 winrate and the
  maximum observed winrate; only b is optimized, by a coarse log-spaced
  grid followed by golden-section refinement. Mirrors how plateau and
  intercept read straight off the data.
* full: all three parameters, damped Gauss-Newton from the pinned result
  with analytic partial derivatives, accepting only steps that lower the
  sum of squared residuals, so the full fit can never end up worse than
  its pinned start.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FitDivergenceError, ScalingLawError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

GRID_LO = 1e-4
GRID_HI = 10.0
GRID_POINTS = 200
B_TOL = 1e-6
FULL_REL_TOL = 1e-10
FULL_MAX_ITERS = 500


@dataclass
class WinratePoint:
    """One observation: winrate at x percent of the data, optional 95% CI."""

    x: float
    winrate: float
    ci95: float | None = None

    def validate(self) -> None:
        if not 0.0 <= self.x <= 100.0:
            raise ScalingLawError(f"x must lie in [0, 100], got {self.x}")
        if not 0.0 <= self.winrate <= 100.0:
            raise ScalingLawError(f"winrate must lie in [0, 100], got {self.winrate}")
        if self.ci95 is not None and self.ci95 < 0:
            raise ScalingLawError(f"ci95 must be non-negative, got {self.ci95}")


@dataclass
class ScalingLawFit:
    r: float
    a: float
    b: float
    sse: float
    mode: str


def predict(fit: ScalingLawFit, x):
    """R(x) = r - (r - a) exp(-b x); accepts a scalar or an array."""
    x_arr = np.asarray(x, dtype=np.float64)
    out = fit.r - (fit.r - fit.a) * np.exp(-fit.b * x_arr)
    return float(out) if np.isscalar(x) or x_arr.ndim == 0 else out


def _prepare(points: list[WinratePoint], weighted: bool):
    if weighted:
        for p in points:
            if p.ci95 is None or p.ci95 <= 0:
                raise ScalingLawError("weighted fitting requires a positive ci95 on every point")
        w = np.array([1.0 / (p.ci95**2) for p in points])
    else:
        w = np.ones(len(points))
    x = np.array([p.x for p in points], dtype=np.float64)
    y = np.array([p.winrate for p in points], dtype=np.float64)
    return x, y, w


def _sse(r: float, a: float, b: float, x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    res = (r - (r - a) * np.exp(-b * x)) - y
    return float(np.sum(w * res * res))


def _golden_section(f, lo: float, hi: float, tol: float = B_TOL) -> float:
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def _best_rate(r: float, a: float, x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    """Grid-then-golden-section minimizer of SSE over b >= 0."""
    grid = np.concatenate([[0.0], np.geomspace(GRID_LO, GRID_HI, GRID_POINTS)])
    sses = [_sse(r, a, b, x, y, w) for b in grid]
    i = int(np.argmin(sses))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    return _golden_section(lambda b: _sse(r, a, b, x, y, w), lo, hi)


def fit_pinned(points: list[WinratePoint], weighted: bool = False) -> ScalingLawFit:
    """Pin a to the x=0 winrate and r to the max winrate; optimize b only."""
    if len(points) < 3:
        raise ScalingLawError(f"insufficient points: need >= 3, got {len(points)}")
    for p in points:
        p.validate()
    zero = [p for p in points if p.x == 0.0]
    if not zero:
        raise ScalingLawError("no x=0 point: pinned fitting needs the unaligned winrate")
    a = zero[0].winrate
    r = max(p.winrate for p in points)
    if r == a and all(p.winrate == a for p in points):
        raise ScalingLawError("flat data: all winrates equal")
    if r == a:
        raise ScalingLawError("flat data: max winrate equals the x=0 winrate (r == a)")
    x, y, w = _prepare(points, weighted)
    b = _best_rate(r, a, x, y, w)
    return ScalingLawFit(r=r, a=a, b=b, sse=_sse(r, a, b, x, y, w), mode="pinned")


def _seed_fit(points: list[WinratePoint], weighted: bool) -> ScalingLawFit:
    if any(p.x == 0.0 for p in points):
        return fit_pinned(points, weighted=weighted)
    # no x=0 observation: seed a from the earliest point instead
    first = min(points, key=lambda p: p.x)
    a = first.winrate
    r = max(p.winrate for p in points)
    if r == a:
        raise ScalingLawError("flat data: no winrate exceeds the earliest observation")
    x, y, w = _prepare(points, weighted)
    b = _best_rate(r, a, x, y, w)
    return ScalingLawFit(r=r, a=a, b=b, sse=_sse(r, a, b, x, y, w), mode="pinned")


def fit_full(points: list[WinratePoint], weighted: bool = False) -> ScalingLawFit:
    """Three-parameter least squares by damped Gauss-Newton.

    Starts at the pinned solution and only ever accepts steps that reduce
    the SSE, so the reported SSE is bounded by the pinned SSE.
    """
    if len(points) < 4:
        raise ScalingLawError(f"insufficient points: need >= 4, got {len(points)}")
    for p in points:
        p.validate()
    if len({p.winrate for p in points}) == 1:
        raise ScalingLawError("flat data: all winrates equal")
    seed = _seed_fit(points, weighted)
    x, y, w = _prepare(points, weighted)

    params = np.array([seed.r, seed.a, seed.b], dtype=np.float64)
    sse = _sse(params[0], params[1], params[2], x, y, w)
    if not math.isfinite(sse):
        raise FitDivergenceError("initial residuals are non-finite", last_fit=seed)
    lam = 1e-3
    sqrt_w = np.sqrt(w)

    for _ in range(FULL_MAX_ITERS):
        r, a, b = params
        decay = np.exp(-b * x)
        res = (r - (r - a) * decay - y) * sqrt_w
        jac = np.column_stack([(1.0 - decay), decay, (r - a) * x * decay]) * sqrt_w[:, None]
        grad = jac.T @ res
        hess = jac.T @ jac

        accepted = False
        candidate = params
        candidate_sse = sse
        for _ in range(60):
            try:
                step = np.linalg.solve(hess + lam * np.eye(3), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + step
            trial[2] = max(trial[2], 0.0)
            if not np.isfinite(trial).all():
                lam *= 10.0
                continue
            trial_sse = _sse(trial[0], trial[1], trial[2], x, y, w)
            if math.isfinite(trial_sse) and trial_sse <= sse:
                candidate = trial
                candidate_sse = trial_sse
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        improvement = sse - candidate_sse
        params, sse = candidate, candidate_sse
        lam = max(lam * 0.5, 1e-12)
        if improvement <= FULL_REL_TOL * max(sse, 1e-300):
            break

    if not (np.isfinite(params).all() and math.isfinite(sse)):
        raise FitDivergenceError(
            "fit diverged to non-finite parameters",
            last_fit=ScalingLawFit(r=seed.r, a=seed.a, b=seed.b, sse=seed.sse, mode="full"),
        )
    return ScalingLawFit(r=float(params[0]), a=float(params[1]), b=float(params[2]),
                         sse=sse, mode="full")


def load_points_csv(path: str | Path) -> list[WinratePoint]:
    """Read observations from a CSV with header ``x,winrate[,ci95]``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ScalingLawError(f"{path}: empty file, expected header x,winrate[,ci95]")
        header = [h.strip().lower() for h in header]
        if header not in (["x", "winrate"], ["x", "winrate", "ci95"]):
            raise ScalingLawError(
                f"{path}: bad header {header!r}, expected columns x,winrate[,ci95]"
            )
        has_ci = len(header) == 3
        points = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ScalingLawError(f"{path}:{lineno}: expected {len(header)} columns")
            try:
                x = float(row[0])
                winrate = float(row[1])
                ci = float(row[2]) if has_ci and row[2].strip() else None
            except ValueError as exc:
                raise ScalingLawError(f"{path}:{lineno}: non-numeric value ({exc})")
            point = WinratePoint(x=x, winrate=winrate, ci95=ci)
            point.validate()
            points.append(point)
    return points


def fit_to_json(fit: ScalingLawFit) -> str:
    return json.dumps({"r": fit.r, "a": fit.a, "b": fit.b, "sse": fit.sse, "mode": fit.mode})


def write_curve_csv(fit: ScalingLawFit, path: str | Path, x_max: int = 100) -> None:
    """Predicted curve at 1-percent steps, for external plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,winrate\n")
        for x in range(0, x_max + 1):
            fh.write(f"{x},{predict(fit, float(x)):.17g}\n")
