import csv

import numpy as np
import pytest

from echoassign.annealer import (
    CostOracle, Schedule, acceptance_probability, anneal, locality, random_baseline,
)
from echoassign.devicegraph import Assignment, NeighborhoodSpec, NoiseGraph, neighborhood
from echoassign.errors import InsufficientStates


def test_schedule():
    s = Schedule.exponential(0.1, 0.9)
    assert s(0) == 0.1 and s(2) == pytest.approx(0.081)
    assert Schedule.logarithmic(1.0)(0) == 1.0
    with pytest.raises(ValueError):
        Schedule.exponential(0.1, 1.0)
    with pytest.raises(ValueError):
        Schedule("linear")


def test_acceptance():
    assert acceptance_probability(-1.0, 0.1) == 1.0
    assert acceptance_probability(0.0, 0.1) == 1.0
    assert acceptance_probability(0.1, 0.1) == pytest.approx(np.exp(-1))
    assert acceptance_probability(1e6, 1e-9) == 0.0


def test_oracle_counts_distinct():
    calls = []
    o = CostOracle(lambda a: calls.append(a) or len(a))
    a, b = Assignment((0, 1)), Assignment((1, 2))
    o(a), o(a), o(b)
    assert o.n_s == 2 and len(calls) == 2
    o.peek(Assignment((2, 3)))
    assert o.n_s == 2
    assert o.fresh().n_s == 0


def test_anneal_trace_and_determinism(tmp_path):
    g = NoiseGraph.grid(3, 3)
    space = g.path_space(3)
    table = {a: float(i) for i, a in enumerate(space.paths)}
    run = lambda seed: anneal(g, NeighborhoodSpec(2), CostOracle.from_table(table), Schedule(), 40,
                              rng=np.random.default_rng(seed), n=3)
    t1, t2 = run(4), run(4)
    assert [s.assignment for s in t1.steps] == [s.assignment for s in t2.steps]
    assert len(t1.steps) == 41 and t1.steps[0].step == 0
    assert t1.best_cost == min(s.cost for s in t1.steps)
    assert all(s.n_s <= s.step + 1 for s in t1.steps)
    assert all(b.n_s >= a.n_s for a, b in zip(t1.steps, t1.steps[1:]))
    rows = list(csv.DictReader(t1.write_csv(tmp_path / "t.csv").open()))
    assert len(rows) == 41 and float(rows[-1]["cost"]) == t1.steps[-1].cost
    with pytest.raises(ValueError):
        anneal(g, NeighborhoodSpec(2), CostOracle.from_table(table), Schedule(), 0, init=space.paths[0])


def test_zero_temperature_never_worsens():
    g = NoiseGraph.grid(3, 3)
    table = {a: float(np.random.default_rng(hash(a.path) % 2**32).random()) for a in g.path_space(3).paths}
    tr = anneal(g, NeighborhoodSpec(1), CostOracle.from_table(table), Schedule.exponential(1e-12, 0.5), 100,
                init=g.path_space(3).paths[0], rng=np.random.default_rng(0))
    costs = [s.cost for s in tr.steps]
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_random_baseline():
    costs = np.arange(10.0)
    assert np.all(random_baseline(costs, 10, 5, np.random.default_rng(0)) == 0)
    best = random_baseline(costs, 3, 4000, np.random.default_rng(1))
    # P(min = 0) = 1 - C(9,3)/C(10,3) = 0.3
    assert np.mean(best == 0) == pytest.approx(0.3, abs=0.03)
    with pytest.raises(InsufficientStates):
        random_baseline(costs, 11, 1)


def test_locality_brute_force():
    g = NoiseGraph.grid(2, 3)
    space = g.path_space(3)
    v = np.random.default_rng(0).random(len(space))
    loc = locality(g, v, 3, ks=(0, 1))
    for k in (0, 1):
        per = [np.mean([abs(v[space.index[b]] - v[i]) for b in neighborhood(g, a, NeighborhoodSpec(k))])
               for i, a in enumerate(space.paths)]
        assert loc[k] == pytest.approx(np.mean(per))
    assert locality(g, np.ones(len(space)), 3) == {0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0}
