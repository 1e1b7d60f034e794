"""Gate-level circuits on a logical line, circuit-family builders and inversion.

A :class:`Circuit` lists gates acting on ``qubits``, an ordered line of
labels. Two-qubit gates may only touch neighbouring entries of that line.
Matrix conventions: the first entry of ``qubits`` (and the first target of a
two-qubit gate) is the most significant bit.

Builders emit the hardware-native gate set by default (``PhasedXZ`` plus
``SQRT_ISWAP``), so gate counts match what a device would execute. Pass
``native=False`` for the textbook form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .devicegraph import Assignment, edge_key
from .errors import InvalidAmplitudes, LengthMismatch

SINGLE_QUBIT_KINDS = ("Rx", "Ry", "Rz", "PhasedXZ", "H", "X", "Y", "Z")
TWO_QUBIT_KINDS = ("CNOT", "SQRT_ISWAP", "SQRT_ISWAP_INV", "SWAP", "CZ")
N_PARAMS = {"Rx": 1, "Ry": 1, "Rz": 1, "PhasedXZ": 3}

_INVERSE_KIND = {"SQRT_ISWAP": "SQRT_ISWAP_INV", "SQRT_ISWAP_INV": "SQRT_ISWAP"}

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1.0, 1j])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def phased_xz(a: float, b: float, c: float) -> np.ndarray:
    """``Rz(a) @ Rx(b) @ Rz(c)``: ``Rz(c)`` acts first."""
    return rz(a) @ rx(b) @ rz(c)


_r = 1 / np.sqrt(2)
_SQRT_ISWAP = np.array([[1, 0, 0, 0], [0, _r, 1j * _r, 0], [0, 1j * _r, _r, 0], [0, 0, 0, 1]])
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)

_FIXED = {
    "H": _H, "X": _X, "Y": _Y, "Z": _Z,
    "CNOT": _CNOT, "SWAP": _SWAP, "CZ": _CZ,
    "SQRT_ISWAP": _SQRT_ISWAP, "SQRT_ISWAP_INV": _SQRT_ISWAP.conj().T,
}


def zxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles ``(a, b, c)`` with ``u ~ phased_xz(a, b, c)`` up to global phase."""
    u = np.asarray(u, dtype=complex)
    v = u / np.sqrt(np.linalg.det(u))
    b = 2 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    tol = 1e-12
    plus = -2 * np.angle(v[0, 0]) if abs(v[0, 0]) > tol else 0.0
    minus = 2 * (np.angle(v[1, 0]) + np.pi / 2) if abs(v[1, 0]) > tol else 0.0
    return float((plus + minus) / 2), float(b), float((plus - minus) / 2)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind in SINGLE_QUBIT_KINDS:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind} takes one target")
        elif self.kind in TWO_QUBIT_KINDS:
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError(f"{self.kind} takes two distinct targets")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.params) != N_PARAMS.get(self.kind, 0):
            raise ValueError(f"{self.kind} expects {N_PARAMS.get(self.kind, 0)} parameters")
        if not all(np.isfinite(self.params)):
            raise ValueError("gate angles must be finite")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.targets) == 2

    def matrix(self) -> np.ndarray:
        if self.kind in _FIXED:
            return _FIXED[self.kind]
        if self.kind == "Rx":
            return rx(*self.params)
        if self.kind == "Ry":
            return ry(*self.params)
        if self.kind == "Rz":
            return rz(*self.params)
        return phased_xz(*self.params)

    def inverse(self) -> "Gate":
        if self.kind in ("Rx", "Ry", "Rz"):
            return Gate(self.kind, self.targets, (-self.params[0],))
        if self.kind == "PhasedXZ":
            a, b, c = self.params
            return Gate("PhasedXZ", self.targets, (-c, -b, -a))
        return Gate(_INVERSE_KIND.get(self.kind, self.kind), self.targets)

    def relabel(self, mapping: Mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[t] for t in self.targets), self.params)


def inverse_kind(kind: str) -> str:
    return _INVERSE_KIND.get(kind, kind)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    qubits: tuple

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("circuit qubits must be distinct")
        pos = {q: i for i, q in enumerate(self.qubits)}
        for g in self.gates:
            if any(t not in pos for t in g.targets):
                raise ValueError(f"gate {g} targets a qubit outside {self.qubits}")
            if g.is_two_qubit and abs(pos[g.targets[0]] - pos[g.targets[1]]) != 1:
                raise ValueError(f"gate {g} breaks line connectivity")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def n(self) -> int:
        return len(self.qubits)

    def position(self, q) -> int:
        return self.qubits.index(q)

    def to_records(self) -> list[dict]:
        return [{"kind": g.kind, "params": list(g.params), "targets": list(g.targets)}
                for g in self.gates]

    def to_json(self) -> str:
        return json.dumps({"qubits": list(self.qubits), "gates": self.to_records()})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        data = json.loads(text)
        gates = [Gate(r["kind"], tuple(r["targets"]), tuple(r.get("params", ()))) for r in data["gates"]]
        return cls(tuple(gates), tuple(data["qubits"]))


@dataclass(frozen=True)
class GateCounts:
    n_i: dict = field(default_factory=dict)
    n_ij: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.n_i.values()) + sum(self.n_ij.values())


def invert(c: Circuit) -> Circuit:
    """Circuit implementing the adjoint: reversed order, each gate inverted."""
    return Circuit(tuple(g.inverse() for g in reversed(c.gates)), c.qubits)


def gate_counts(c: Circuit) -> GateCounts:
    n_i = {q: 0 for q in c.qubits}
    n_ij = {edge_key(a, b): 0 for a, b in zip(c.qubits, c.qubits[1:])}
    for g in c.gates:
        if g.is_two_qubit:
            n_ij[edge_key(*g.targets)] += 1
        else:
            n_i[g.targets[0]] += 1
    return GateCounts(n_i, n_ij)


def assign(c: Circuit, a: Assignment | Sequence[int]) -> Circuit:
    """Relabel logical qubit ``c.qubits[k]`` to physical qubit ``a[k]``."""
    path = tuple(a)
    if len(path) != c.n:
        raise LengthMismatch(f"assignment has {len(path)} qubits, circuit has {c.n}")
    mapping = dict(zip(c.qubits, path))
    return Circuit(tuple(g.relabel(mapping) for g in c.gates), path)


# -- dense references --------------------------------------------------------


def apply_matrix(state: np.ndarray, u: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    """Apply ``u`` to the given line positions of an ``n``-qubit state vector."""
    t = len(positions)
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, positions, range(t))
    shape = psi.shape
    psi = (u @ psi.reshape(2**t, -1)).reshape(shape)
    return np.moveaxis(psi, range(t), positions).reshape(-1)


def statevector(c: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    n = c.n
    if initial is None:
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex).copy()
    for g in c.gates:
        psi = apply_matrix(psi, g.matrix(), [c.position(t) for t in g.targets], n)
    return psi


def unitary(c: Circuit) -> np.ndarray:
    n = c.n
    cols = [statevector(c, np.eye(2**n, dtype=complex)[:, k]) for k in range(2**n)]
    return np.stack(cols, axis=1)


# -- native decomposition ------------------------------------------------------


def _pxz(q, u: np.ndarray) -> Gate:
    return Gate("PhasedXZ", (q,), zxz_angles(u))


def _native_cnot(c, t) -> list[Gate]:
    # CNOT ~ (H x I) . SQRT_ISWAP . (X x I) . SQRT_ISWAP . (XHS x HSH)
    return [
        _pxz(c, _X @ _H @ _S),
        _pxz(t, _H @ _S @ _H),
        Gate("SQRT_ISWAP", (c, t)),
        _pxz(c, _X),
        Gate("SQRT_ISWAP", (c, t)),
        _pxz(c, _H),
    ]


def _native(g: Gate) -> list[Gate]:
    if g.kind in ("SQRT_ISWAP", "SQRT_ISWAP_INV", "PhasedXZ"):
        return [g]
    if not g.is_two_qubit:
        return [_pxz(g.targets[0], g.matrix())]
    a, b = g.targets
    if g.kind == "CNOT":
        return _native_cnot(a, b)
    if g.kind == "CZ":
        return [_pxz(b, _H)] + _native_cnot(a, b) + [_pxz(b, _H)]
    return _native_cnot(a, b) + _native_cnot(b, a) + _native_cnot(a, b)


def to_native(c: Circuit) -> Circuit:
    """Rewrite into ``PhasedXZ`` and ``SQRT_ISWAP``/``SQRT_ISWAP_INV`` gates only."""
    return Circuit(tuple(h for g in c.gates for h in _native(g)), c.qubits)


def _finish(gates: list[Gate], n: int, native: bool) -> Circuit:
    c = Circuit(tuple(gates), tuple(range(n)))
    return to_native(c) if native else c


# -- builders --------------------------------------------------------------


def build_ghz(n: int, native: bool = True) -> Circuit:
    if n < 1:
        raise ValueError("n must be >= 1")
    gates = [Gate("H", (0,))] + [Gate("CNOT", (k, k + 1)) for k in range(n - 1)]
    return _finish(gates, n, native)


def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def _prep_unitary(alpha: complex, beta: complex) -> np.ndarray:
    return np.array([[alpha, -np.conj(beta)], [beta, np.conj(alpha)]], dtype=complex)


def build_swapnet(n: int, alpha: complex, beta: complex, hops: int, native: bool = True) -> Circuit:
    """Prepare ``alpha|0> + beta|1>`` on the first qubit and move it ``hops`` sites.

    Each hop is a pair of ``SQRT_ISWAP`` gates (one iSWAP), which also imprints
    a relative phase ``i``; a final ``Rz`` on the destination undoes it.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-9:
        raise InvalidAmplitudes("|alpha|^2 + |beta|^2 must equal 1")
    if not 0 <= hops <= n - 1:
        raise ValueError("hops must lie in [0, n-1]")
    gates = [_pxz(0, _prep_unitary(alpha, beta))]
    for h in range(hops):
        gates += [Gate("SQRT_ISWAP", (h, h + 1)), Gate("SQRT_ISWAP", (h, h + 1))]
    if hops % 4:
        gates.append(Gate("Rz", (hops,), (-hops * np.pi / 2,)))
    return _finish(gates, n, native)


def swapnet_state(n: int, alpha: complex, beta: complex, hops: int) -> np.ndarray:
    single = np.array([alpha, beta], dtype=complex)
    psi = np.array([1.0 + 0j])
    for k in range(n):
        psi = np.kron(psi, single if k == hops else np.array([1, 0], dtype=complex))
    return psi


_PAULI_GATES = {"I": None, "X": "X", "Y": "Y", "Z": "Z"}


def build_clifford_conjugation(n: int, seed: int, layers: int | None = None,
                               pauli: str | None = None, native: bool = True) -> Circuit:
    """``H^n C^dag P C H^n`` with ``C`` random layers of {H, S, I} and CZ on the line.

    ``pauli`` fixes the Pauli string (e.g. ``"XIZY"``); otherwise it is drawn
    from ``seed`` together with ``C``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    layers = n if layers is None else layers
    clifford: list[Gate] = []
    for layer in range(layers):
        for q in range(n):
            choice = rng.integers(3)
            if choice == 0:
                clifford.append(Gate("H", (q,)))
            elif choice == 1:
                clifford.append(Gate("Rz", (q,), (np.pi / 2,)))
        for q in range(layer % 2, n - 1, 2):
            clifford.append(Gate("CZ", (q, q + 1)))
    if pauli is None:
        pauli = "".join("IXYZ"[i] for i in rng.integers(4, size=n))
    if len(pauli) != n or set(pauli) - set("IXYZ"):
        raise ValueError("pauli must be a length-n string over IXYZ")
    hadamards = [Gate("H", (q,)) for q in range(n)]
    paulis = [Gate(p, (q,)) for q, p in enumerate(pauli) if p != "I"]
    c_dag = [g.inverse() for g in reversed(clifford)]
    return _finish(hadamards + clifford + paulis + c_dag + hadamards, n, native)


def _controlled_phase(a, b, phi: float) -> list[Gate]:
    return [
        Gate("CNOT", (a, b)),
        Gate("Rz", (b,), (-phi / 2,)),
        Gate("CNOT", (a, b)),
        Gate("Rz", (a,), (phi / 2,)),
        Gate("Rz", (b,), (phi / 2,)),
    ]


def build_qft_basis(n: int, j: int, native: bool = True) -> Circuit:
    """Basis state ``|j>`` followed by a nearest-neighbour QFT network.

    Uses the ``exp(-2 pi i j k / 2^n)`` sign convention. Logical qubits travel
    through a swap network so every controlled phase is between neighbours;
    the network leaves line position ``p`` (1-based) holding the factor
    ``(|0> + exp(-2 pi i j / 2^p)|1>)/sqrt(2)``.
    """
    if not 0 <= j < 2**n:
        raise ValueError("j must lie in [0, 2^n)")
    gates = [Gate("X", (q,)) for q in range(n) if (j >> (n - 1 - q)) & 1]
    order = list(range(n))
    for rnd in range(n):
        gates.append(Gate("H", (0,)))
        for p in range(n - 1 - rnd):
            dist = order[p + 1] - order[p]
            gates += _controlled_phase(p, p + 1, -np.pi / 2**dist)
            gates.append(Gate("SWAP", (p, p + 1)))
            order[p], order[p + 1] = order[p + 1], order[p]
    return _finish(gates, n, native)


def qft_basis_state(n: int, j: int) -> np.ndarray:
    psi = np.array([1.0 + 0j])
    for p in range(1, n + 1):
        psi = np.kron(psi, np.array([1, np.exp(-2j * np.pi * j / 2**p)]) / np.sqrt(2))
    return psi


def _random_pxz(rng, q) -> Gate:
    return Gate("PhasedXZ", (q,), (rng.uniform(-np.pi, np.pi), rng.uniform(0, np.pi),
                                   rng.uniform(-np.pi, np.pi)))


def build_random_circuit(n: int, depth: int, seed: int) -> Circuit:
    """Alternating layers of random ``PhasedXZ`` and ``SQRT_ISWAP`` brickwork."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    for layer in range(depth):
        if layer % 2 == 0:
            gates += [_random_pxz(rng, q) for q in range(n)]
        else:
            offset = (layer // 2) % 2
            gates += [Gate("SQRT_ISWAP", (q, q + 1)) for q in range(offset, n - 1, 2)]
    return Circuit(tuple(gates), tuple(range(n)))


def random_circuit_like(template: Circuit, seed: int) -> Circuit:
    """Random native circuit with the same per-qubit and per-edge gate counts as ``template``.

    Single-qubit slots become random ``PhasedXZ`` rotations and two-qubit slots
    become ``SQRT_ISWAP`` on the same edge; the order of slots is shuffled.
    """
    rng = np.random.default_rng(seed)
    slots = [g.targets for g in template.gates]
    order = rng.permutation(len(slots))
    gates = []
    for i in order:
        t = slots[i]
        gates.append(Gate("SQRT_ISWAP", t) if len(t) == 2 else _random_pxz(rng, t[0]))
    return Circuit(tuple(gates), template.qubits)


# -- stabilizer propagation --------------------------------------------------------


def _quarter_turns(theta: float) -> int | None:
    k = theta / (np.pi / 2)
    r = round(k)
    return r % 4 if abs(k - r) < 1e-9 else None


def stabilizer_bitstring(c: Circuit) -> str:
    """Output bitstring of a Clifford circuit whose output on |0^n> is a basis state.

    Propagates the ``Z_i`` stabilizers of the input through the gates in the
    binary symplectic picture. Supports H, X, Y, Z, ``Rz`` by multiples of
    pi/2, CNOT, CZ and SWAP. Raises ``ValueError`` for other gates or when the
    output is not a computational basis state.
    """
    n = c.n
    x = np.zeros((n, n), dtype=np.uint8)
    z = np.eye(n, dtype=np.uint8)
    r = np.zeros(n, dtype=np.uint8)

    def h(a):
        r[:] ^= x[:, a] & z[:, a]
        x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()

    def s(a):
        r[:] ^= x[:, a] & z[:, a]
        z[:, a] ^= x[:, a]

    def cnot(a, b):
        r[:] ^= x[:, a] & z[:, b] & (x[:, b] ^ z[:, a] ^ 1)
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]

    for g in c.gates:
        p = [c.position(t) for t in g.targets]
        if g.kind == "H":
            h(p[0])
        elif g.kind == "X":
            r[:] ^= z[:, p[0]]
        elif g.kind == "Z":
            r[:] ^= x[:, p[0]]
        elif g.kind == "Y":
            r[:] ^= x[:, p[0]] ^ z[:, p[0]]
        elif g.kind == "Rz" and _quarter_turns(g.params[0]) is not None:
            for _ in range(_quarter_turns(g.params[0])):
                s(p[0])
        elif g.kind == "CNOT":
            cnot(*p)
        elif g.kind == "CZ":
            h(p[1]); cnot(*p); h(p[1])
        elif g.kind == "SWAP":
            cnot(p[0], p[1]); cnot(p[1], p[0]); cnot(p[0], p[1])
        else:
            raise ValueError(f"gate {g} is not a supported Clifford gate")

    if x.any():
        raise ValueError("output is not a computational basis state")
    # Solve z . b = r over GF(2).
    a = np.concatenate([z, r[:, None]], axis=1)
    row = 0
    pivots = []
    for col in range(n):
        hits = np.flatnonzero(a[row:, col]) + row
        if len(hits) == 0:
            continue
        a[[row, hits[0]]] = a[[hits[0], row]]
        for other in range(n):
            if other != row and a[other, col]:
                a[other] ^= a[row]
        pivots.append(col)
        row += 1
    bits = np.zeros(n, dtype=int)
    for i, col in enumerate(pivots):
        bits[col] = a[i, -1]
    return "".join(str(b) for b in bits)


def ghz_native_cnot_check() -> float:
    """Largest deviation of the native CNOT decomposition from CNOT (up to phase)."""
    u = unitary(Circuit(tuple(_native_cnot(0, 1)), (0, 1)))
    phase = u[0, 0] / abs(u[0, 0])
    return float(np.max(np.abs(u / phase - _CNOT)))


def iter_two_qubit_edges(c: Circuit) -> Iterable[tuple]:
    for g in c.gates:
        if g.is_two_qubit:
            yield edge_key(*g.targets)
