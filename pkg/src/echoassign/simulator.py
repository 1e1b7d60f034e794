"""Dense density-matrix simulation of assigned circuits under gate noise.

States are ``(D, D)`` complex arrays, or ``(B, D, D)`` stacks when many
assignments of the same logical circuit are simulated at once. Register
position 0 is the most significant bit.

Noise is attached after every gate:

* ``LOCAL``: single-qubit gate on physical qubit ``i`` is followed by a
  depolarizing channel of parameter ``eps[i]`` on that qubit, a two-qubit gate
  on edge ``{i, j}`` by one of parameter ``eta[ij]`` on the pair.
* ``GLOBAL``: the same parameters drive a depolarizing channel on the whole
  register.
* ``UNITARY``: a fixed unitary ``W`` follows each gate of the forward circuit;
  in an echo, ``W^dag`` precedes each gate of the inverse half, so the two
  halves cancel exactly.

Weights are always depolarization parameters ``p`` of ``rho -> p I/d + (1-p) rho``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuits import Circuit, Gate, assign, inverse_kind, invert, statevector
from .devicegraph import Assignment, NoiseGraph, edge_key
from .errors import NonNormalized
from .readout import ConfusionMatrix, apply_confusion

MAX_QUBITS = 12
_BATCH_BYTES = 256 * 2**20


class NoiseMode(enum.Enum):
    NONE = "none"
    LOCAL = "local"
    GLOBAL = "global"
    UNITARY = "unitary"


@dataclass(frozen=True)
class NoiseModel:
    """Noise configuration. ``unitaries`` is only used in ``UNITARY`` mode.

    Keys of ``unitaries`` are a gate kind (``"SQRT_ISWAP"``) or a pair
    ``(kind, physical_targets)``; the more specific key wins. Gates without a
    matching key are noiseless.
    """

    mode: NoiseMode = NoiseMode.NONE
    unitaries: Mapping = field(default_factory=dict)

    def __post_init__(self):
        mode = NoiseMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is NoiseMode.UNITARY:
            for key, w in self.unitaries.items():
                w = np.asarray(w)
                if not np.allclose(w @ w.conj().T, np.eye(len(w)), atol=1e-10):
                    raise ValueError(f"perturbation for {key!r} is not unitary")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(NoiseMode.NONE)

    @classmethod
    def local(cls) -> "NoiseModel":
        return cls(NoiseMode.LOCAL)

    @classmethod
    def global_(cls) -> "NoiseModel":
        return cls(NoiseMode.GLOBAL)

    @classmethod
    def unitary(cls, unitaries: Mapping) -> "NoiseModel":
        return cls(NoiseMode.UNITARY, dict(unitaries))

    def perturbation(self, kind: str, targets: tuple) -> np.ndarray | None:
        w = self.unitaries.get((kind, tuple(targets)))
        return self.unitaries.get(kind) if w is None else w


# -- primitive kernels on (B, D, D) stacks ------------------------------------


def _as_batch(rho: np.ndarray) -> tuple[np.ndarray, bool]:
    rho = np.asarray(rho, dtype=complex)
    return (rho[None], True) if rho.ndim == 2 else (rho, False)


def _nqubits(rho: np.ndarray) -> int:
    return int(rho.shape[-1]).bit_length() - 1


def _apply_block(rho: np.ndarray, u: np.ndarray, start: int, k: int) -> np.ndarray:
    """``U rho U^dag`` for ``U`` acting on positions ``start..start+k-1``.

    ``u`` is ``(2^k, 2^k)`` or a per-batch ``(B, 2^k, 2^k)`` stack.
    """
    b, d, _ = rho.shape
    n = _nqubits(rho)
    left, mid = 2**start, 2**k
    right = d // (left * mid)
    batched = u.ndim == 3
    rows = rho.reshape(b, left, mid, right * d)
    rows = (u[:, None] if batched else u) @ rows
    cols = rows.reshape(b, d * left, mid, right)
    cols = (u.conj()[:, None] if batched else u.conj()) @ cols
    return cols.reshape(b, d, d)


def _depolarize_block(rho: np.ndarray, p: np.ndarray, start: int, k: int) -> np.ndarray:
    """Partial-trace-and-replace on ``k`` consecutive positions with per-batch ``p``."""
    b, d, _ = rho.shape
    left, mid = 2**start, 2**k
    right = d // (left * mid)
    r = rho.reshape(b, left, mid, right, left, mid, right)
    traced = np.trace(r, axis1=2, axis2=5) / mid
    out = r * (1 - p)[:, None, None, None, None, None, None]
    scaled = traced * p[:, None, None, None, None]
    for a in range(mid):
        out[:, :, a, :, :, a, :] += scaled
    return out.reshape(b, d, d)


def _depolarize_global(rho: np.ndarray, p: np.ndarray) -> np.ndarray:
    d = rho.shape[-1]
    out = rho * (1 - p)[:, None, None]
    idx = np.arange(d)
    out[:, idx, idx] += (p / d)[:, None]
    return out


def _gate_block(g: Gate, qubits: Sequence) -> tuple[np.ndarray, int, int]:
    """Matrix and contiguous block of a gate; reversed pairs get a swapped matrix."""
    pos = [qubits.index(t) for t in g.targets]
    u = g.matrix()
    if len(pos) == 1:
        return u, pos[0], 1
    if pos[0] > pos[1]:
        u = _swap_conj(u)
    return u, min(pos), 2


_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def _swap_conj(u: np.ndarray) -> np.ndarray:
    return _SWAP @ u @ _SWAP


# -- public single-state operations ---------------------------------------------


def zero_state(n: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"register size must lie in [1, {MAX_QUBITS}]")
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def apply_gate(rho: np.ndarray, g: Gate, qubits: Sequence | None = None) -> np.ndarray:
    """``U rho U^dag`` for the gate's unitary; ``qubits`` is the register order."""
    batch, single = _as_batch(rho)
    qubits = tuple(range(_nqubits(batch))) if qubits is None else tuple(qubits)
    u, start, k = _gate_block(g, qubits)
    out = _apply_block(batch, u, start, k)
    return out[0] if single else out


def apply_depolarizing(rho: np.ndarray, p: float, targets: Sequence | None = None,
                       qubits: Sequence | None = None) -> np.ndarray:
    """``rho -> p (I/d_T (x) tr_T rho) + (1 - p) rho`` on ``targets``.

    ``targets=None`` (or every qubit) gives the global channel. Local targets must
    be consecutive register positions, which line-connectivity circuits guarantee.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    batch, single = _as_batch(rho)
    n = _nqubits(batch)
    qubits = tuple(range(n)) if qubits is None else tuple(qubits)
    pv = np.full(len(batch), float(p))
    if targets is None or len(set(targets)) == n:
        out = _depolarize_global(batch, pv)
    else:
        pos = sorted(qubits.index(t) for t in targets)
        if pos != list(range(pos[0], pos[0] + len(pos))):
            raise ValueError("depolarizing targets must be consecutive positions")
        out = _depolarize_block(batch, pv, pos[0], len(pos))
    return out[0] if single else out


# -- compiled programs ------------------------------------------------------------


def _gate_weights(g: Gate, paths: np.ndarray, logical: tuple, graph: NoiseGraph) -> np.ndarray:
    """Per-assignment depolarization parameter attached to a logical gate."""
    cols = [logical.index(t) for t in g.targets]
    phys = paths[:, cols]
    if len(cols) == 1:
        return np.array([graph.eps[int(v)] for v in phys[:, 0]])
    return np.array([graph.eta[edge_key(int(a), int(b))] for a, b in phys])


def _unitary_stack(nm: NoiseModel, kind: str, g: Gate, paths: np.ndarray, logical: tuple):
    cols = [logical.index(t) for t in g.targets]
    mats = [nm.perturbation(kind, tuple(int(v) for v in row)) for row in paths[:, cols]]
    if all(m is None for m in mats):
        return None
    eye = np.eye(2 ** len(cols), dtype=complex)
    stack = np.stack([eye if m is None else np.asarray(m, dtype=complex) for m in mats])
    if len(cols) == 2 and cols[0] > cols[1]:
        stack = _SWAP @ stack @ _SWAP
    return stack


def simulate(c: Circuit, paths: Sequence[Assignment | Sequence[int]], g: NoiseGraph | None,
             nm: NoiseModel, echo: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Run logical circuit ``c`` on every assignment in ``paths`` at once.

    Returns ``(forward, final)``: the ``(B, D, D)`` states after ``c`` and, when
    ``echo`` is set, after ``c`` followed by ``invert(c)`` (otherwise ``None``).
    Assignments are not validated here; see :func:`run`.
    """
    n = c.n
    if n > MAX_QUBITS:
        raise ValueError(f"register size {n} exceeds the dense cap of {MAX_QUBITS}")
    logical = c.qubits
    path_arr = np.array([tuple(p) for p in paths], dtype=np.int64).reshape(len(paths), n)
    b = len(path_arr)
    rho = np.zeros((b, 2**n, 2**n), dtype=complex)
    rho[:, 0, 0] = 1.0

    def step(state, gate: Gate, w_kind: str | None, before: bool):
        u, start, k = _gate_block(gate, logical)
        w = None
        if nm.mode is NoiseMode.UNITARY:
            w = _unitary_stack(nm, w_kind, gate, path_arr, logical)
            if w is not None and before:
                state = _apply_block(state, w.conj().transpose(0, 2, 1), start, k)
        state = _apply_block(state, u, start, k)
        if nm.mode is NoiseMode.UNITARY:
            if w is not None and not before:
                state = _apply_block(state, w, start, k)
        elif nm.mode is not NoiseMode.NONE:
            p = _gate_weights(gate, path_arr, logical, g)
            if np.any(p > 0):
                if nm.mode is NoiseMode.LOCAL:
                    state = _depolarize_block(state, p, start, k)
                else:
                    state = _depolarize_global(state, p)
        return state

    for gate in c.gates:
        rho = step(rho, gate, gate.kind, before=False)
    if not echo:
        return rho, None
    forward = rho.copy()
    for gate in invert(c).gates:
        rho = step(rho, gate, inverse_kind(gate.kind), before=True)
    return forward, rho


def batch_size(n: int, copies: int = 4) -> int:
    """Number of ``n``-qubit states that fit the working-memory budget."""
    return max(1, _BATCH_BYTES // (copies * 16 * 4**n))


def run(c: Circuit, a: Assignment | Sequence[int], g: NoiseGraph | None, nm: NoiseModel) -> np.ndarray:
    """Noisy output state of ``c`` executed on assignment ``a``."""
    if g is not None:
        g.check(a)
    if len(tuple(a)) != c.n:
        assign(c, a)  # raises LengthMismatch
    return simulate(c, [a], g, nm)[0][0]


def run_echo(c: Circuit, a: Assignment | Sequence[int], g: NoiseGraph | None, nm: NoiseModel) -> np.ndarray:
    """Noisy state after ``c`` followed by ``invert(c)`` on assignment ``a``."""
    if g is not None:
        g.check(a)
    if len(tuple(a)) != c.n:
        assign(c, a)
    return simulate(c, [a], g, nm, echo=True)[1][0]


def ideal_state(c: Circuit) -> np.ndarray:
    return statevector(c)


# -- measurement ------------------------------------------------------------------


def measure_probs(rho: np.ndarray, confusion: ConfusionMatrix | Sequence[tuple[float, float]] | None = None) -> np.ndarray:
    """Outcome distribution over ``2^n`` bitstrings, optionally through readout confusion.

    ``confusion`` is a :class:`ConfusionMatrix` or per-qubit ``(p10, p01)`` rates.
    """
    probs = np.clip(np.real(np.diagonal(rho, axis1=-2, axis2=-1)), 0.0, None)
    probs = probs / probs.sum(axis=-1, keepdims=True)
    if confusion is None:
        return probs
    cm = confusion if isinstance(confusion, ConfusionMatrix) else ConfusionMatrix.from_rates(confusion)
    if probs.ndim == 1:
        return apply_confusion(probs, cm)
    return np.stack([apply_confusion(p, cm) for p in probs])


def sample_bitstrings(probs: np.ndarray, t: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram of ``t`` categorical draws, indexed by integer bitstring."""
    probs = np.asarray(probs, dtype=float)
    if t < 1:
        raise ValueError("t must be >= 1")
    if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-9:
        raise NonNormalized(f"probabilities sum to {probs.sum():.12g}")
    probs = np.clip(probs, 0.0, None)
    return rng.multinomial(t, probs / probs.sum())


def counts_to_dict(counts: np.ndarray) -> dict[str, int]:
    n = int(len(counts)).bit_length() - 1
    return {format(i, f"0{n}b"): int(v) for i, v in enumerate(counts) if v}
