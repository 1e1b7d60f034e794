"""Rank concordance and conditional-exceedance statistics over paired samples."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AllTied, EchoAssignError, EmptyCondition

_CHUNK = 2048


@dataclass(frozen=True)
class PairedSample:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if len(x) != len(y):
            raise ValueError("x and y must have equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("paired samples must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.x)

    def take(self, idx: np.ndarray) -> "PairedSample":
        return PairedSample(self.x[idx], self.y[idx])


def _pair_counts(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int]:
    """``(C - D, ties in x, ties in y)`` over unordered pairs, counted exactly in chunks."""
    n = len(x)
    s = tx = ty = 0
    for start in range(0, n, _CHUNK):
        xi, yi = x[start:start + _CHUNK, None], y[start:start + _CHUNK, None]
        sx = np.sign(xi - x[None, :]).astype(np.int8)
        sy = np.sign(yi - y[None, :]).astype(np.int8)
        s += int(np.sum(sx.astype(np.int64) * sy))
        tx += int(np.count_nonzero(sx == 0))
        ty += int(np.count_nonzero(sy == 0))
    # ordered pairs count each unordered pair twice; the diagonal is always tied
    return s // 2, (tx - n) // 2, (ty - n) // 2


def kendall_tau_b(s: PairedSample) -> float:
    """Tie-corrected Kendall coefficient ``(C - D) / sqrt((n0 - n1)(n0 - n2))``."""
    n = len(s)
    if n < 2:
        raise ValueError("need at least two pairs")
    cd, n1, n2 = _pair_counts(s.x, s.y)
    n0 = n * (n - 1) // 2
    if n1 == n0 or n2 == n0:
        raise AllTied("every x or every y value is identical")
    return cd / math.sqrt((n0 - n1) * (n0 - n2))


def nearest_rank(values: np.ndarray, k: float) -> float:
    """k-th percentile by the nearest-rank rule."""
    v = np.sort(np.asarray(values, dtype=float))
    rank = max(1, math.ceil(k / 100 * len(v)))
    return float(v[rank - 1])


def conditional_percentile_prob(s: PairedSample, k: float) -> float:
    """``P(X > X_k, Y > Y_k) / P(X > X_k)`` with nearest-rank percentiles."""
    if not 0 < k < 100:
        raise ValueError("k must lie strictly between 0 and 100")
    above_x = s.x > nearest_rank(s.x, k)
    if not above_x.any():
        raise EmptyCondition(f"no x value exceeds its {k}th percentile")
    above_y = s.y > nearest_rank(s.y, k)
    return float(np.count_nonzero(above_x & above_y) / np.count_nonzero(above_x))


def conditional_curve(s: PairedSample, ks=range(5, 100, 5)) -> dict[int, float]:
    out = {}
    for k in ks:
        try:
            out[k] = conditional_percentile_prob(s, k)
        except EmptyCondition:
            out[k] = float("nan")
    return out


def bootstrap_std(statistic: Callable[[PairedSample], float], s: PairedSample,
                  resamples: int = 1000, rng: np.random.Generator | None = None) -> float:
    """Std of ``statistic`` over row resamples drawn with replacement.

    Resamples on which the statistic is undefined (all ties, empty condition)
    are skipped.
    """
    if resamples < 100:
        raise ValueError("use at least 100 resamples")
    rng = np.random.default_rng() if rng is None else rng
    n = len(s)
    vals = []
    for _ in range(resamples):
        try:
            vals.append(statistic(s.take(rng.integers(0, n, n))))
        except EchoAssignError:
            continue
    return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0


def bootstrap_mean_ci(values: np.ndarray, resamples: int = 2000, level: float = 0.95,
                      rng: np.random.Generator | None = None) -> tuple[float, float, float]:
    """Mean with a percentile bootstrap interval: ``(mean, low, high)``."""
    rng = np.random.default_rng() if rng is None else rng
    v = np.asarray(values, dtype=float)
    idx = rng.integers(0, len(v), (resamples, len(v)))
    means = v[idx].mean(axis=1)
    tail = (1 - level) / 2 * 100
    lo, hi = np.percentile(means, [tail, 100 - tail])
    return float(v.mean()), float(lo), float(hi)
