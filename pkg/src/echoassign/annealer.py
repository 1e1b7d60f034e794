"""Simulated annealing over line assignments, with a memoized cost oracle.

The oracle counts every distinct assignment it evaluates; that count ``n_s``
is the budget used to compare against best-of-``n_s`` random sampling.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .devicegraph import Assignment, NeighborhoodSpec, NoiseGraph, sample_neighbor
from .errors import InsufficientStates


@dataclass(frozen=True)
class Schedule:
    """Temperature at step ``i``: ``T0 * alpha**i`` or ``T0 / (1 + log(1 + i))``."""

    kind: str = "exponential"
    t0: float = 0.1
    alpha: float = 0.987

    def __post_init__(self):
        if self.kind not in ("exponential", "logarithmic"):
            raise ValueError(f"unknown schedule {self.kind!r}")
        if self.t0 <= 0:
            raise ValueError("T0 must be positive")
        if self.kind == "exponential" and not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def exponential(cls, t0: float, alpha: float) -> "Schedule":
        return cls("exponential", t0, alpha)

    @classmethod
    def logarithmic(cls, t0: float) -> "Schedule":
        return cls("logarithmic", t0, 0.5)

    def __call__(self, i: int) -> float:
        if self.kind == "exponential":
            return self.t0 * self.alpha**i
        return self.t0 / (1 + math.log1p(i))


class CostOracle:
    """Memoized ``Assignment -> cost``. Only first-time queries count toward ``n_s``."""

    def __init__(self, fn: Callable[[Assignment], float]):
        self._fn = fn
        self._memo: dict[Assignment, float] = {}

    @classmethod
    def from_table(cls, table: Mapping[Assignment, float]) -> "CostOracle":
        """Offline oracle over a precomputed lookup table."""
        return cls(table.__getitem__)

    def __call__(self, a: Assignment) -> float:
        if a not in self._memo:
            self._memo[a] = float(self._fn(a))
        return self._memo[a]

    def peek(self, a: Assignment) -> float:
        """Evaluate without recording the query."""
        return self._memo[a] if a in self._memo else float(self._fn(a))

    @property
    def n_s(self) -> int:
        return len(self._memo)

    def fresh(self) -> "CostOracle":
        """Same cost function, empty memo."""
        return CostOracle(self._fn)


def acceptance_probability(delta: float, temperature: float) -> float:
    """Metropolis rule: certain for ``delta <= 0``, else ``exp(-delta / T)``."""
    if delta <= 0:
        return 1.0
    with np.errstate(over="ignore", under="ignore"):
        return float(np.exp(-delta / temperature))


@dataclass(frozen=True)
class TraceStep:
    step: int
    assignment: Assignment
    cost: float
    temperature: float
    accepted: bool
    n_s: int


@dataclass
class AnnealTrace:
    steps: list[TraceStep] = field(default_factory=list)
    best: tuple[Assignment, float] | None = None

    @property
    def n_s(self) -> int:
        return self.steps[-1].n_s if self.steps else 0

    @property
    def best_cost(self) -> float:
        return self.best[1]

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "temperature", "cost", "accepted", "n_s", "assignment"])
            for s in self.steps:
                w.writerow([s.step, repr(s.temperature), repr(s.cost), int(s.accepted), s.n_s, str(s.assignment)])
        return path


def anneal(g: NoiseGraph, spec: NeighborhoodSpec, oracle: CostOracle, schedule: Schedule,
           steps: int, init: Assignment | None = None, rng: np.random.Generator | None = None,
           n: int | None = None) -> AnnealTrace:
    """Simulated annealing from ``init`` (uniform over all length-``n`` paths if omitted).

    The trace holds the initial state as step 0, then one row per proposal
    with the state held after that step.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    if init is None:
        if n is None:
            raise ValueError("give either init or n")
        paths = g.path_space(n).paths
        init = paths[int(rng.integers(len(paths)))]
    g.check(init)
    current, cost = init, oracle(init)
    trace = AnnealTrace([TraceStep(0, current, cost, schedule(0), True, oracle.n_s)], (current, cost))
    for i in range(steps):
        temp = schedule(i)
        proposal = sample_neighbor(g, current, spec, rng)
        new_cost = oracle(proposal)
        accepted = rng.random() < acceptance_probability(new_cost - cost, temp)
        if accepted:
            current, cost = proposal, new_cost
            if cost < trace.best[1]:
                trace.best = (current, cost)
        trace.steps.append(TraceStep(i + 1, current, cost, temp, bool(accepted), oracle.n_s))
    return trace


def random_baseline(costs: Sequence[float], n_s: int, trials: int,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Best (lowest) cost among ``n_s`` distinct draws from ``costs``, for each trial."""
    costs = np.asarray(costs, dtype=float)
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    if n_s > len(costs):
        raise InsufficientStates(f"n_s={n_s} exceeds population of {len(costs)}")
    rng = np.random.default_rng() if rng is None else rng
    return np.array([costs[rng.choice(len(costs), n_s, replace=False)].min() for _ in range(trials)])


def locality(g: NoiseGraph, values: Sequence[float], n: int, ks: Sequence[int] = (0, 1, 2, 3)) -> dict[int, float]:
    """Average over assignments of the average ``|v - v'|`` over their neighbourhood, per ``k``.

    ``values`` are aligned with ``g.path_space(n).paths``.
    """
    space = g.path_space(n)
    v = np.asarray(values, dtype=float)
    if len(v) != len(space):
        raise ValueError("values must align with the path population")
    out = {}
    for k in ks:
        per = []
        for i in range(len(space)):
            idx = space.neighbor_indices(i, k)
            if len(idx):
                per.append(np.abs(v[idx] - v[i]).mean())
        out[k] = float(np.mean(per)) if per else 0.0
    return out
