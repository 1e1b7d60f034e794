"""Weighted device connectivity graphs and line-path assignments.

A :class:`NoiseGraph` stores the hardware coupling graph together with the
per-qubit error probability ``eps``, per-coupler error probability ``eta`` and
per-qubit readout flip rates ``(p10, p01)`` where ``p10 = p(1|0)`` and
``p01 = p(0|1)``.

Assignments of an ``n``-qubit line circuit are ordered simple paths on the
graph. Both orientations of a path are distinct assignments.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import EmptyNeighborhood, InvalidAssignment

BUILTIN_LAYOUTS = ("rainbow", "weber")


def edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, order=True)
class Assignment:
    """Ordered simple path of physical qubits; ``path[k]`` hosts logical qubit ``k``."""

    path: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(v) for v in self.path))
        if len(set(self.path)) != len(self.path):
            raise InvalidAssignment(f"repeated vertex in {self.path}")

    def __len__(self) -> int:
        return len(self.path)

    def __iter__(self) -> Iterator[int]:
        return iter(self.path)

    def __getitem__(self, k):
        return self.path[k]

    def reverse(self) -> "Assignment":
        return Assignment(self.path[::-1])

    def edges(self) -> list[tuple[int, int]]:
        return [edge_key(a, b) for a, b in zip(self.path, self.path[1:])]

    def __str__(self) -> str:
        return "-".join(str(v) for v in self.path)

    @classmethod
    def parse(cls, text: str) -> "Assignment":
        return cls(tuple(int(v) for v in text.split("-")))


@dataclass(frozen=True)
class NeighborhoodSpec:
    k: int = 1

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")


@dataclass(frozen=True, eq=False)
class NoiseGraph:
    """Device connectivity weighted by gate and readout error rates."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    eps: Mapping[int, float] = field(default_factory=dict)
    eta: Mapping[tuple[int, int], float] = field(default_factory=dict)
    readout: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    coords: Mapping[int, tuple[int, int]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        verts = tuple(sorted(int(v) for v in self.vertices))
        vset = set(verts)
        edges = tuple(sorted({edge_key(int(a), int(b)) for a, b in self.edges}))
        for a, b in edges:
            if a == b or a not in vset or b not in vset:
                raise ValueError(f"bad edge ({a}, {b})")
        eps = {v: float(self.eps.get(v, 0.0)) for v in verts}
        eta = {e: 0.0 for e in edges}
        for (a, b), w in self.eta.items():
            e = edge_key(a, b)
            if e not in eta:
                raise ValueError(f"weight for unknown edge {e}")
            eta[e] = float(w)
        readout = {v: tuple(float(x) for x in self.readout.get(v, (0.0, 0.0))) for v in verts}
        probs = list(eps.values()) + list(eta.values()) + [x for r in readout.values() for x in r]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("error probabilities must lie in [0, 1]")
        adj: dict[int, list[int]] = {v: [] for v in verts}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "coords", {int(k): tuple(v) for k, v in self.coords.items()})
        object.__setattr__(self, "_adj", {v: tuple(sorted(n)) for v, n in adj.items()})
        object.__setattr__(self, "_spaces", {})

    # -- construction -----------------------------------------------------

    @classmethod
    def grid(cls, rows: int, cols: int, eps=0.0, eta=0.0, name: str = "") -> "NoiseGraph":
        """Rectangular nearest-neighbour grid; vertex id is ``row * cols + col``."""
        verts = [r * cols + c for r in range(rows) for c in range(cols)]
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        coords = {r * cols + c: (r, c) for r in range(rows) for c in range(cols)}
        eps_map = eps if isinstance(eps, Mapping) else {v: eps for v in verts}
        eta_map = eta if isinstance(eta, Mapping) else {e: eta for e in edges}
        return cls(tuple(verts), tuple(edges), eps_map, eta_map, coords=coords,
                   name=name or f"grid{rows}x{cols}")

    def with_weights(self, eps=None, eta=None, readout=None) -> "NoiseGraph":
        return NoiseGraph(
            self.vertices, self.edges,
            self.eps if eps is None else eps,
            self.eta if eta is None else eta,
            self.readout if readout is None else readout,
            self.coords, self.name,
        )

    def scaled(self, s: float) -> "NoiseGraph":
        """Copy with every gate error weight multiplied by ``s``."""
        return self.with_weights(
            eps={v: s * w for v, w in self.eps.items()},
            eta={e: s * w for e, w in self.eta.items()},
        )

    # -- queries ----------------------------------------------------------

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def has_edge(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self.eta

    def edge_weight(self, a: int, b: int) -> float:
        return self.eta[edge_key(a, b)]

    def is_valid(self, a: Assignment | Sequence[int]) -> bool:
        path = tuple(a)
        if len(set(path)) != len(path) or any(v not in self.eps for v in path):
            return False
        return all(self.has_edge(x, y) for x, y in zip(path, path[1:]))

    def check(self, a: Assignment | Sequence[int]) -> None:
        if not self.is_valid(a):
            raise InvalidAssignment(f"{tuple(a)} is not a simple path of {self.name or 'graph'}")

    def path_space(self, n: int) -> "PathSpace":
        if n not in self._spaces:
            self._spaces[n] = PathSpace(self, n)
        return self._spaces[n]

    # -- serialization ----------------------------------------------------

    def to_layout(self) -> dict:
        qubits = []
        for v in self.vertices:
            q = {"id": v}
            if v in self.coords:
                q["row"], q["col"] = self.coords[v]
            q["eps"] = self.eps[v]
            q["p10"], q["p01"] = self.readout[v]
            qubits.append(q)
        edges = [{"a": a, "b": b, "eta": self.eta[(a, b)]} for a, b in self.edges]
        out = {"qubits": qubits, "edges": edges}
        if self.name:
            out = {"name": self.name, **out}
        return out

    @classmethod
    def from_layout(cls, data: Mapping) -> "NoiseGraph":
        qubits = data["qubits"]
        verts = [int(q["id"]) for q in qubits]
        coords = {int(q["id"]): (int(q["row"]), int(q["col"])) for q in qubits if "row" in q}
        eps = {int(q["id"]): float(q.get("eps", 0.0)) for q in qubits}
        readout = {int(q["id"]): (float(q.get("p10", 0.0)), float(q.get("p01", 0.0))) for q in qubits}
        edges = [(int(e["a"]), int(e["b"])) for e in data["edges"]]
        eta = {edge_key(int(e["a"]), int(e["b"])): float(e.get("eta", 0.0)) for e in data["edges"]}
        return cls(tuple(verts), tuple(edges), eps, eta, readout, coords, data.get("name", ""))


def load_layout(path) -> NoiseGraph:
    with open(path) as fh:
        return NoiseGraph.from_layout(json.load(fh))


def layout_text(g: NoiseGraph) -> str:
    return json.dumps(g.to_layout(), indent=1, sort_keys=False) + "\n"


def save_layout(g: NoiseGraph, path) -> Path:
    path = Path(path)
    path.write_text(layout_text(g))
    return path


def builtin_layout(name: str) -> NoiseGraph:
    """Load a bundled device layout (``"rainbow"`` or ``"weber"``) with zero weights."""
    if name not in BUILTIN_LAYOUTS:
        raise KeyError(f"unknown layout {name!r}; choose from {BUILTIN_LAYOUTS}")
    text = resources.files("echoassign").joinpath("layouts", f"{name}.json").read_text()
    return NoiseGraph.from_layout(json.loads(text))


# -- path enumeration and neighborhoods -------------------------------------


def _iter_paths(g: NoiseGraph, n: int) -> Iterator[tuple[int, ...]]:
    if n < 1:
        raise ValueError("path length must be >= 1")
    path: list[int] = []
    on_path: set[int] = set()

    def extend():
        if len(path) == n:
            yield tuple(path)
            return
        for v in g.neighbors(path[-1]):
            if v not in on_path:
                path.append(v)
                on_path.add(v)
                yield from extend()
                path.pop()
                on_path.discard(v)

    for start in g.vertices:
        path.append(start)
        on_path.add(start)
        yield from extend()
        path.pop()
        on_path.discard(start)


def enumerate_simple_paths(g: NoiseGraph, n: int) -> list[Assignment]:
    """All ordered simple paths with exactly ``n`` vertices, in lexicographic order."""
    return [Assignment(p) for p in _iter_paths(g, n)]


class PathSpace:
    """Indexed population of all length-``n`` assignments on a graph.

    Holds a vertex-membership matrix so that set differences between
    assignments are a single matrix product.
    """

    def __init__(self, g: NoiseGraph, n: int):
        self.graph = g
        self.n = n
        self.paths = enumerate_simple_paths(g, n)
        self.index = {a: i for i, a in enumerate(self.paths)}
        col = {v: j for j, v in enumerate(g.vertices)}
        member = np.zeros((len(self.paths), len(g.vertices)), dtype=np.int16)
        for i, a in enumerate(self.paths):
            member[i, [col[v] for v in a.path]] = 1
        self._member = member
        self._reverse = np.array([self.index[a.reverse()] for a in self.paths], dtype=np.int64)
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.paths)

    def reverse_index(self, i: int) -> int:
        return int(self._reverse[i])

    def set_difference(self, i: int) -> np.ndarray:
        """|set(a') - set(a_i)| for every a' in the population."""
        return self.n - self._member @ self._member[i]

    def neighbor_indices(self, i: int, k: int) -> np.ndarray:
        key = (i, k)
        if key not in self._cache:
            diff = self.set_difference(i)
            mask = (diff > 0) & (diff <= k)
            mask[self._reverse[i]] = True
            mask[i] = False
            self._cache[key] = np.flatnonzero(mask)
        return self._cache[key]


def neighborhood(g: NoiseGraph, a: Assignment, spec: NeighborhoodSpec) -> list[Assignment]:
    """Assignments differing from ``a`` in at most ``spec.k`` vertices, plus its reversal.

    ``a`` itself is never included, so for a single-vertex path the reversal
    contributes nothing.
    """
    g.check(a)
    space = g.path_space(len(a))
    return [space.paths[j] for j in space.neighbor_indices(space.index[a], spec.k)]


def sample_neighbor(g: NoiseGraph, a: Assignment, spec: NeighborhoodSpec, rng) -> Assignment:
    """Uniformly random member of ``neighborhood(g, a, spec)``."""
    g.check(a)
    space = g.path_space(len(a))
    idx = space.neighbor_indices(space.index[a], spec.k)
    if len(idx) == 0:
        raise EmptyNeighborhood(f"no neighbor of {a} with k={spec.k}")
    return space.paths[int(idx[rng.integers(len(idx))])]


def path_counts(g: NoiseGraph, lengths: Iterable[int]) -> dict[int, int]:
    return {n: sum(1 for _ in _iter_paths(g, n)) for n in lengths}


# -- synthetic noise maps --------------------------------------------------


@dataclass(frozen=True)
class WeightRanges:
    """Uniform ranges for randomly drawn weights."""

    eps: tuple[float, float] = (0.005, 0.02)
    eta: tuple[float, float] = (0.02, 0.08)
    readout: tuple[float, float] = (0.0, 0.0)


def random_noisegraph(rows: int, cols: int, rng: np.random.Generator,
                      ranges: WeightRanges = WeightRanges(), name: str = "") -> NoiseGraph:
    """Grid with independent uniform weights; readout rates are ``(p10, p01)`` draws."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    g = NoiseGraph.grid(rows, cols, name=name)
    eps = {v: float(rng.uniform(*ranges.eps)) for v in g.vertices}
    eta = {e: float(rng.uniform(*ranges.eta)) for e in g.edges}
    readout = {v: (float(rng.uniform(*ranges.readout)), float(rng.uniform(*ranges.readout)))
               for v in g.vertices}
    return g.with_weights(eps, eta, readout)


def _grid_distance(g: NoiseGraph, targets: Sequence[int]) -> dict[int, int]:
    return {v: min(abs(g.coords[v][0] - g.coords[u][0]) + abs(g.coords[v][1] - g.coords[u][1])
                   for u in targets) for v in g.vertices}


def perimeter_paths(g: NoiseGraph, n: int) -> list[Assignment]:
    """Length-``n`` paths whose vertices all sit on the outer ring of a grid layout."""
    rows = max(r for r, _ in g.coords.values())
    cols = max(c for _, c in g.coords.values())
    ring = {v for v, (r, c) in g.coords.items() if r in (0, rows) or c in (0, cols)}
    return [a for a in g.path_space(n).paths if set(a.path) <= ring]


def planted_noisegraph(rows: int, cols: int, n: int, rng: np.random.Generator,
                       background: WeightRanges = WeightRanges(),
                       low: WeightRanges = WeightRanges((0.0, 0.001), (0.0, 0.005)),
                       gradient: float = 1.0, placement: str = "perimeter",
                       path: Sequence[int] | None = None) -> tuple[NoiseGraph, Assignment]:
    """Grid noise map whose best length-``n`` assignments lie on one planted path.

    The planted path gets weights drawn from ``low``, mirrored about its centre
    so that both orientations score identically. Background weights are drawn
    from ``background`` and scaled by ``(1 + gradient * d) / (1 + gradient)``,
    where ``d`` is the grid distance to the planted path, which slopes the
    landscape toward it. ``placement`` is ``"perimeter"`` (path drawn from the
    outer ring) or ``"any"``; an explicit ``path`` overrides it.
    """
    g = random_noisegraph(rows, cols, rng, background)
    if path is not None:
        planted = Assignment(tuple(path))
        g.check(planted)
    else:
        pool = perimeter_paths(g, n) if placement == "perimeter" else g.path_space(n).paths
        if not pool:
            raise ValueError(f"no length-{n} path for placement {placement!r}")
        planted = pool[int(rng.integers(len(pool)))]
    dist = _grid_distance(g, planted.path)
    scale = {v: (1 + gradient * d) / (1 + gradient) for v, d in dist.items()}
    eps = {v: w * scale[v] for v, w in g.eps.items()}
    eta = {e: w * min(scale[e[0]], scale[e[1]]) for e, w in g.eta.items()}
    m = len(planted)
    v_low = rng.uniform(*low.eps, size=(m + 1) // 2)
    e_low = rng.uniform(*low.eta, size=max(m // 2, 1))
    for i, v in enumerate(planted):
        eps[v] = float(v_low[min(i, m - 1 - i)])
    for i, e in enumerate(planted.edges()):
        eta[e] = float(e_low[min(i, m - 2 - i)])
    return g.with_weights(eps, eta), planted
