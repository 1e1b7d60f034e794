"""Uncorrelated per-qubit readout confusion: forward model, inversion, rejection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularConfusion

DEFAULT_THRESHOLD = 0.15


@dataclass(frozen=True)
class ConfusionMatrix:
    """Stack of per-qubit column-stochastic matrices ``[[p(0|0), p(0|1)], [p(1|0), p(1|1)]]``.

    ``matrices[k]`` belongs to the k-th qubit of the register (most significant first).
    """

    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float).reshape(-1, 2, 2)
        if np.any(m < 0) or np.any(m > 1):
            raise ValueError("confusion entries must lie in [0, 1]")
        if not np.allclose(m.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("confusion columns must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @classmethod
    def from_rates(cls, rates: Sequence[tuple[float, float]]) -> "ConfusionMatrix":
        """Build from per-qubit ``(p(1|0), p(0|1))`` flip rates."""
        mats = [[[1 - p10, p01], [p10, 1 - p01]] for p10, p01 in rates]
        return cls(np.array(mats, dtype=float).reshape(-1, 2, 2))

    @classmethod
    def identity(cls, n: int) -> "ConfusionMatrix":
        return cls(np.tile(np.eye(2), (n, 1, 1)))

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def p10(self) -> np.ndarray:
        return self.matrices[:, 1, 0]

    @property
    def p01(self) -> np.ndarray:
        return self.matrices[:, 0, 1]

    def p00(self) -> float:
        """Probability that ``0^n`` is read out correctly."""
        return float(np.prod(self.matrices[:, 0, 0]))

    def inverses(self) -> np.ndarray:
        det = np.linalg.det(self.matrices)
        if np.any(np.abs(det) < 1e-9):
            raise SingularConfusion(f"qubit {int(np.argmin(np.abs(det)))} has a singular confusion matrix")
        return np.linalg.inv(self.matrices)

    def condition_numbers(self) -> np.ndarray:
        return np.linalg.cond(self.matrices)


def _apply_local(vec: np.ndarray, mats: np.ndarray) -> np.ndarray:
    n = len(mats)
    out = np.asarray(vec, dtype=float).reshape((2,) * n)
    for k, m in enumerate(mats):
        out = np.moveaxis(np.tensordot(m, out, axes=(1, k)), 0, k)
    return out.reshape(-1)


def apply_confusion(probs: np.ndarray, cm: ConfusionMatrix) -> np.ndarray:
    """Distribution over recorded bitstrings given the true distribution ``probs``."""
    return _apply_local(probs, cm.matrices)


def correct(observed: np.ndarray, cm: ConfusionMatrix) -> np.ndarray:
    """Invert the confusion map. The result may hold small negative entries."""
    return _apply_local(observed, cm.inverses())


def corrected_zero_estimate(counts: np.ndarray, cm: ConfusionMatrix) -> tuple[float, float]:
    """Readout-corrected probability of ``0^n`` from a shot histogram, with its standard error.

    The estimate is a linear functional ``sum_j w_j c_j / t`` of the counts, where
    ``w`` is the all-zeros row of the inverse map; its multinomial variance gives
    the standard error.
    """
    counts = np.asarray(counts, dtype=float)
    t = counts.sum()
    freq = counts / t
    inv = cm.inverses()
    w = inv[0][0, :]
    for m in inv[1:]:
        w = np.kron(w, m[0, :])
    mean = float(w @ freq)
    var = max(float((w**2) @ freq) - mean**2, 0.0)
    return mean, float(np.sqrt(var / t))


@dataclass(frozen=True)
class RejectVerdict:
    per_qubit: np.ndarray  # True where the qubit is rejected
    rejected: bool
    worst_rate: float


def reject(cm: ConfusionMatrix, threshold: float = DEFAULT_THRESHOLD) -> RejectVerdict:
    """Reject an assignment when any qubit has ``max(p(0|1), p(1|0)) > threshold``."""
    worst = np.maximum(cm.p01, cm.p10)
    bad = worst > threshold
    return RejectVerdict(bad, bool(bad.any()), float(worst.max(initial=0.0)))
