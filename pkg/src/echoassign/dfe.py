"""Direct fidelity estimation for structured target states, with simulated shot noise.

Each estimator takes a density matrix, rotates it through a handful of local
measurement settings, samples bitstrings and assembles a fidelity estimate.
Pass ``t=None`` to use exact outcome probabilities instead of shots.
Estimates are never clipped to ``[0, 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import _H, _prep_unitary, rz
from .readout import ConfusionMatrix
from .simulator import measure_probs, sample_bitstrings


@dataclass(frozen=True)
class MeasurementSetting:
    """Per-qubit rotations applied before a computational-basis measurement."""

    rotations: tuple
    label: str = ""


@dataclass(frozen=True)
class DFEResult:
    estimate: float
    stderr: float
    settings: int


def _rotate(rho: np.ndarray, setting: MeasurementSetting) -> np.ndarray:
    u = np.array([[1.0 + 0j]])
    for r in setting.rotations:
        u = np.kron(u, r)
    return u @ rho @ u.conj().T


def _outcomes(rho, setting, t, rng, confusion) -> tuple[np.ndarray, int | None]:
    """Outcome frequencies for one setting and the number of shots behind them."""
    probs = measure_probs(_rotate(rho, setting), confusion)
    if t is None:
        return probs, None
    return sample_bitstrings(probs, t, rng) / t, t


def _parity_signs(n: int) -> np.ndarray:
    bits = np.arange(2**n)
    ones = np.array([bin(b).count("1") for b in bits])
    return 1 - 2 * (ones % 2)


def _mean_and_var(values: np.ndarray, freq: np.ndarray) -> tuple[float, float]:
    m = float(values @ freq)
    return m, max(float((values**2) @ freq) - m * m, 0.0)


def ghz_settings(n: int) -> list[MeasurementSetting]:
    """One Z-basis setting plus ``n`` rotated X/Y settings."""
    eye = np.eye(2, dtype=complex)
    settings = [MeasurementSetting(tuple(eye for _ in range(n)), "Z")]
    for k in range(1, n + 1):
        r = _H @ rz(-k * np.pi / n)
        settings.append(MeasurementSetting(tuple(r for _ in range(n)), f"XY{k}"))
    return settings


def ghz_dfe(rho: np.ndarray, n: int, t: int | None, rng: np.random.Generator | None = None,
            confusion: ConfusionMatrix | None = None) -> DFEResult:
    """Fidelity with ``(|0^n> + |1^n>)/sqrt(2)`` from ``n + 1`` settings of ``t`` shots each.

    The Z setting gives the population term ``(p(0^n) + p(1^n))/2``; setting
    ``k`` measures the parity of ``cos(k pi/n) X + sin(k pi/n) Y`` on every
    qubit, and the alternating average of these parities gives the coherence
    term.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng() if rng is None else rng
    settings = ghz_settings(n)
    zvals = np.zeros(2**n)
    zvals[0] = zvals[-1] = 0.5
    freq, shots = _outcomes(rho, settings[0], t, rng, confusion)
    f_z, var = _mean_and_var(zvals, freq)
    var_total = var / shots if shots else 0.0
    signs = _parity_signs(n)
    f_xy = 0.0
    for k, s in enumerate(settings[1:], start=1):
        freq, shots = _outcomes(rho, s, t, rng, confusion)
        m, v = _mean_and_var(signs, freq)
        f_xy += (-1) ** k * m / (2 * n)
        if shots:
            var_total += v / shots / (2 * n) ** 2
    return DFEResult(f_z + f_xy, float(np.sqrt(var_total)), len(settings))


def qft_phases(n: int, j: int) -> np.ndarray:
    """Relative phase of ``|1>`` on each line position (1-based ``p``) of the QFT output."""
    return np.array([-2 * np.pi * j / 2**p for p in range(1, n + 1)])


def qft_setting(n: int, j: int) -> MeasurementSetting:
    """Rotations mapping each factor of the QFT output onto ``|0>``."""
    return MeasurementSetting(tuple(_H @ rz(-phi) for phi in qft_phases(n, j)), "QFT")


def qft_dfe(rho: np.ndarray, n: int, j: int, t: int | None, rng: np.random.Generator | None = None,
            confusion: ConfusionMatrix | None = None) -> DFEResult:
    """Fidelity with the QFT of ``|j>`` from a single setting.

    Averages all ``2^n`` parity products of the rotated outcomes, which reduces
    to the frequency of ``0^n``.
    """
    if not 0 <= j < 2**n:
        raise ValueError("j must lie in [0, 2^n)")
    rng = np.random.default_rng() if rng is None else rng
    freq, shots = _outcomes(rho, qft_setting(n, j), t, rng, confusion)
    parities = _walsh_hadamard(freq)
    est = float(parities.sum() / 2**n)
    stderr = float(np.sqrt(max(est * (1 - est), 0.0) / shots)) if shots else 0.0
    return DFEResult(est, stderr, 1)


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """``out[l] = sum_b v[b] (-1)^{l.b}``: expectation of every parity product."""
    out = np.array(v, dtype=float)
    h = 1
    while h < len(out):
        out = out.reshape(-1, 2, h)
        out = np.concatenate([out[:, 0] + out[:, 1], out[:, 0] - out[:, 1]], axis=1).reshape(-1)
        h *= 2
    return out


def _reduced_qubit(rho: np.ndarray, pos: int) -> np.ndarray:
    n = int(rho.shape[0]).bit_length() - 1
    r = rho.reshape(2**pos, 2, 2 ** (n - pos - 1), 2**pos, 2, 2 ** (n - pos - 1))
    return np.einsum("aibajb->ij", r)


def swapnet_fidelity(rho: np.ndarray, alpha: complex, beta: complex, hops: int, t: int | None,
                     rng: np.random.Generator | None = None) -> DFEResult:
    """Single-qubit projective measurement of the transported state on position ``hops``."""
    rng = np.random.default_rng() if rng is None else rng
    v = _prep_unitary(alpha, beta)
    r = v.conj().T @ _reduced_qubit(rho, hops) @ v
    p0 = float(np.clip(np.real(r[0, 0]), 0.0, 1.0))
    if t is None:
        return DFEResult(p0, 0.0, 1)
    est = rng.binomial(t, p0) / t
    return DFEResult(est, float(np.sqrt(est * (1 - est) / t)), 1)


def bitstring_fidelity(rho: np.ndarray, bitstring: str, t: int | None,
                       rng: np.random.Generator | None = None,
                       confusion: ConfusionMatrix | None = None) -> DFEResult:
    """Fidelity with a computational basis state: probability of measuring it."""
    rng = np.random.default_rng() if rng is None else rng
    eye = np.eye(2, dtype=complex)
    freq, shots = _outcomes(rho, MeasurementSetting(tuple(eye for _ in bitstring)), t, rng, confusion)
    est = float(freq[int(bitstring, 2)])
    stderr = float(np.sqrt(est * (1 - est) / shots)) if shots else 0.0
    return DFEResult(est, stderr, 1)
