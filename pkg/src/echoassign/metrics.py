"""Assignment metrics: state fidelity, Loschmidt echo, benchmark product and friends.

``c`` is always the logical circuit (already in the native gate set when gate
counts matter) and ``a`` the physical assignment it is relabeled onto.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit, GateCounts, assign, gate_counts, random_circuit_like, statevector
from .devicegraph import Assignment, NoiseGraph, edge_key
from .errors import MissingWeight, WitnessNotFound, ZeroF0
from .readout import ConfusionMatrix, corrected_zero_estimate
from .simulator import NoiseMode, NoiseModel, batch_size, measure_probs, run, run_echo, sample_bitstrings, simulate


@dataclass(frozen=True)
class MetricsRecord:
    assignment: Assignment
    F: float
    F_LE: float
    F0: float
    F_LE_rand_mean: float = float("nan")
    F_LE_rand_std: float = float("nan")
    shots: int = 0

    @property
    def F_extrapolated(self) -> float:
        return extrapolate_f(self.F_LE, self.F0) if self.F0 > 0 else float("nan")


def _overlap(psi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("i,...ij,j->...", psi.conj(), rho, psi))


def fidelity(c: Circuit, a, g: NoiseGraph | None, nm: NoiseModel) -> float:
    """``<psi|rho|psi>`` with ``psi`` the noiseless output of ``c``."""
    return float(_overlap(statevector(c), run(c, a, g, nm)))


def loschmidt_exact(c: Circuit, a, g: NoiseGraph | None, nm: NoiseModel) -> float:
    """Probability of returning to ``0^n`` after noisy ``c`` then noisy ``invert(c)``."""
    return float(np.real(run_echo(c, a, g, nm)[0, 0]))


def confusion_for(g: NoiseGraph, a) -> ConfusionMatrix:
    """Readout confusion of the qubits along ``a`` taken from the graph."""
    return ConfusionMatrix.from_rates([g.readout[v] for v in a])


def loschmidt_sampled(c: Circuit, a, g: NoiseGraph | None, nm: NoiseModel, t: int,
                      confusion: ConfusionMatrix | None = None, correct_readout: bool = False,
                      rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Shot estimate of the echo: frequency of ``0^n`` over ``t`` shots, with stderr.

    With ``correct_readout`` the histogram is passed through the inverse
    confusion map before reading off the ``0^n`` component.
    """
    rng = np.random.default_rng() if rng is None else rng
    probs = measure_probs(run_echo(c, a, g, nm), confusion)
    counts = sample_bitstrings(probs, t, rng)
    if correct_readout and confusion is not None:
        return corrected_zero_estimate(counts, confusion)
    p = counts[0] / t
    return float(p), float(np.sqrt(p * (1 - p) / t))


def f0(counts: GateCounts, g: NoiseGraph) -> float:
    """Product of per-gate success probabilities ``(1 - eps_i)^n_i (1 - eta_ij)^n_ij``."""
    out = 1.0
    for v, k in counts.n_i.items():
        if v not in g.eps:
            raise MissingWeight(f"no single-qubit weight for vertex {v}")
        out *= (1.0 - g.eps[v]) ** k
    for e, k in counts.n_ij.items():
        e = edge_key(*e)
        if e not in g.eta:
            raise MissingWeight(f"no two-qubit weight for edge {e}")
        out *= (1.0 - g.eta[e]) ** k
    return out


def f0_for(c: Circuit, a, g: NoiseGraph) -> float:
    return f0(gate_counts(assign(c, a)), g)


def pauli_rate(p: float, n: int) -> float:
    """Pauli error rate of an ``n``-qubit depolarizing channel with parameter ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return p * (1.0 - 4.0 ** (-n))


def extrapolate_f(f_le: float, f_0: float) -> float:
    """Fidelity estimate from the echo and the benchmark product."""
    if f_0 <= 0:
        raise ZeroF0("benchmark product must be positive")
    return 0.5 * (f_le / f_0 + f_0)


def global_closed_form(f_0: float, n: int) -> tuple[float, float]:
    """``(F, F_LE)`` under global depolarizing noise for a register of ``n`` qubits."""
    d = 2**n
    return (d - 1) / d * f_0 + 1 / d, (d - 1) / d * f_0**2 + 1 / d


@dataclass(frozen=True)
class FlipWitness:
    """Weights and counts for which rescaling the weights flips the preferred option."""

    eps: np.ndarray
    eps_prime: np.ndarray
    c: float
    c_prime: float
    counts: np.ndarray

    def value(self, x: np.ndarray, scale: float) -> float:
        return float(np.prod((1 - scale * x) ** self.counts))

    def holds(self) -> bool:
        return (self.value(self.eps, self.c) > self.value(self.eps_prime, self.c)
                and self.value(self.eps, self.c_prime) < self.value(self.eps_prime, self.c_prime))

    def __iter__(self):
        return iter((self.eps, self.eps_prime, self.c, self.c_prime))


def f0_rescaling_flip_witness(seed: int = 0, max_tries: int = 100_000, margin: float = 1e-6) -> FlipWitness:
    """Randomized search for two weight vectors whose benchmark-product order flips
    when every weight is rescaled from ``c`` to ``c'``."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        m = int(rng.integers(2, 4))
        eps, eps_p = rng.uniform(0, 1, m), rng.uniform(0, 1, m)
        counts = rng.integers(1, 4, m)
        c, c_p = np.sort(rng.uniform(0.05, 1.0, 2))
        if c_p - c < 1e-3:
            continue
        w = FlipWitness(eps, eps_p, float(c), float(c_p), counts)
        gap1 = w.value(eps, c) - w.value(eps_p, c)
        gap2 = w.value(eps_p, c_p) - w.value(eps, c_p)
        if gap1 > margin and gap2 > margin:
            return w
    raise WitnessNotFound(f"no witness in {max_tries} draws")


def loschmidt_rand_avg(template: Circuit, a, g: NoiseGraph | None, nm: NoiseModel,
                       r: int = 5, seed: int = 0) -> tuple[float, float]:
    """Mean and sample std of the echo over ``r`` random circuits gate-count-matched to ``template``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    vals = np.array([loschmidt_exact(random_circuit_like(template, seed + k), a, g, nm) for k in range(r)])
    return float(vals.mean()), float(vals.std(ddof=1)) if r > 1 else 0.0


# -- batched sweeps ------------------------------------------------------------------------


def _f0_batch(c: Circuit, paths: np.ndarray, g: NoiseGraph) -> np.ndarray:
    counts = gate_counts(c)
    col = {q: i for i, q in enumerate(c.qubits)}
    log = np.zeros(len(paths))
    zero = np.zeros(len(paths), dtype=bool)
    for q, k in counts.n_i.items():
        if k:
            w = np.array([g.eps[int(v)] for v in paths[:, col[q]]])
            zero |= w >= 1.0
            log += k * np.log1p(-np.minimum(w, 1 - 1e-300))
    for (x, y), k in counts.n_ij.items():
        if k:
            w = np.array([g.eta[edge_key(int(u), int(v))] for u, v in paths[:, [col[x], col[y]]]])
            zero |= w >= 1.0
            log += k * np.log1p(-np.minimum(w, 1 - 1e-300))
    return np.where(zero, 0.0, np.exp(log))


def _echo_chunks(c: Circuit, paths: list, g: NoiseGraph | None, nm: NoiseModel):
    chunk = batch_size(c.n)
    for start in range(0, len(paths), chunk):
        part = paths[start:start + chunk]
        fwd, fin = simulate(c, part, g, nm, echo=True)
        yield slice(start, start + len(part)), fwd, fin


def echo_batch(c: Circuit, paths: Sequence, g: NoiseGraph | None, nm: NoiseModel,
               want_fidelity: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """``(F, F_LE)`` arrays for many assignments, simulated in memory-bounded chunks."""
    paths = [tuple(p) for p in paths]
    psi = statevector(c)
    fid, le = np.full(len(paths), np.nan), np.empty(len(paths))
    for sl, fwd, fin in _echo_chunks(c, paths, g, nm):
        if want_fidelity:
            fid[sl] = _overlap(psi, fwd)
        le[sl] = np.real(fin[:, 0, 0])
    return fid, le


def loschmidt_sampled_batch(c: Circuit, paths: Sequence, g: NoiseGraph, nm: NoiseModel, t: int,
                            rng: np.random.Generator, readout: bool = True,
                            correct_readout: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Shot estimates of the echo for many assignments.

    ``readout`` applies each path's confusion rates from ``g`` before sampling;
    ``correct_readout`` then inverts them on the histogram.
    """
    paths = [tuple(p) for p in paths]
    est, err = np.empty(len(paths)), np.empty(len(paths))
    for sl, _, fin in _echo_chunks(c, paths, g, nm):
        for i, rho in zip(range(sl.start, sl.stop), fin):
            cm = confusion_for(g, paths[i]) if readout else None
            counts = sample_bitstrings(measure_probs(rho, cm), t, rng)
            if correct_readout and cm is not None:
                est[i], err[i] = corrected_zero_estimate(counts, cm)
            else:
                est[i] = counts[0] / t
                err[i] = np.sqrt(est[i] * (1 - est[i]) / t)
    return est, err


def evaluate_assignments(c: Circuit, paths: Sequence, g: NoiseGraph, nm: NoiseModel,
                         r: int = 0, seed: int = 0) -> list[MetricsRecord]:
    """Exact metrics for every assignment; ``r > 0`` adds the random-circuit echo average."""
    path_arr = np.array([tuple(p) for p in paths], dtype=np.int64).reshape(len(paths), c.n)
    fid, le = echo_batch(c, paths, g, nm)
    f0s = _f0_batch(c, path_arr, g)
    if r > 0:
        rand = np.stack([echo_batch(random_circuit_like(c, seed + k), paths, g, nm, want_fidelity=False)[1]
                         for k in range(r)])
        rmean = rand.mean(axis=0)
        rstd = rand.std(axis=0, ddof=1) if r > 1 else np.zeros(len(paths))
    else:
        rmean = rstd = np.full(len(paths), np.nan)
    return [
        MetricsRecord(Assignment(tuple(int(v) for v in p)), float(fid[i]), float(le[i]), float(f0s[i]),
                      float(rmean[i]), float(rstd[i]))
        for i, p in enumerate(path_arr)
    ]
