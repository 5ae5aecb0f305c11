"""Amplitude- and phase-damping Kraus sets and their grouped application.

In the grouped form every qubit of a group is hit by the *same* Kraus
index, i.e. the map is ``rho -> sum_{i,j,...} K_{ij..} rho K_{ij..}^dagger``
with ``K = (E_i on group 1) x (E_j on group 2) x ...``.  With groups of more
than one qubit this map is not trace preserving, because
``sum_i (E_i^dagger E_i) x (E_i^dagger E_i) != I x I``.  The deficit is
kept visible: the result is flagged as an unnormalized density matrix.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import DensityMatrix, apply_matrix
from .tolerances import ATOL

MODELS = ("ad", "pd")


@dataclass(frozen=True, eq=False)
class KrausSet:
    model: str
    eta: float
    operators: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.operators)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"decoherence rate must lie in [0, 1], got {eta!r}")
    return eta


def kraus_ad(eta: float) -> KrausSet:
    """Amplitude damping: ``E0 = diag(1, sqrt(1-eta))``, ``E1 = sqrt(eta)|0><1|``."""
    eta = _check_eta(eta)
    e0 = np.array([[1, 0], [0, math.sqrt(1 - eta)]], dtype=complex)
    e1 = np.array([[0, math.sqrt(eta)], [0, 0]], dtype=complex)
    return KrausSet("ad", eta, (e0, e1))


def kraus_pd(eta: float) -> KrausSet:
    """Phase damping: ``sqrt(1-eta) I``, ``sqrt(eta)|0><0|``, ``sqrt(eta)|1><1|``."""
    eta = _check_eta(eta)
    e0 = math.sqrt(1 - eta) * np.eye(2, dtype=complex)
    e1 = math.sqrt(eta) * np.diag([1, 0]).astype(complex)
    e2 = math.sqrt(eta) * np.diag([0, 1]).astype(complex)
    return KrausSet("pd", eta, (e0, e1, e2))


def kraus(model: str, eta: float) -> KrausSet:
    if model == "ad":
        return kraus_ad(eta)
    if model == "pd":
        return kraus_pd(eta)
    raise ValueError(f"noise model must be 'ad' or 'pd', got {model!r}")


def completeness_check(kraus_set: KrausSet) -> float:
    """``max |sum_i E_i^dagger E_i - I|`` over matrix entries."""
    total = sum(e.conj().T @ e for e in kraus_set.operators)
    return float(np.abs(total - np.eye(2)).max())


@dataclass(frozen=True)
class NoiseGrouping:
    """Qubit groups sharing one Kraus index each; ``untouched`` qubits see no noise."""

    groups: tuple[tuple[str, tuple[int, ...]], ...]
    untouched: tuple[int, ...] = ()

    def check(self, num_qubits: int):
        seen = [q for _, qs in self.groups for q in qs] + list(self.untouched)
        if sorted(seen) != list(range(num_qubits)):
            raise ValueError(f"grouping {self} does not partition {num_qubits} qubits")

    @classmethod
    def correlated(cls) -> "NoiseGrouping":
        """Five-qubit CBRSP channel: Alice's S1, R2 share index i; Bob's R1, S2 share j; C1 clean."""
        return cls((("i", (0, 3)), ("j", (1, 2))), untouched=(4,))

    @classmethod
    def per_qubit(cls, noisy: Sequence[int], untouched: Sequence[int] = ()) -> "NoiseGrouping":
        """Independent noise on every listed qubit (a CPTP map)."""
        return cls(tuple((f"q{q}", (q,)) for q in noisy), tuple(untouched))


def apply_grouped_noise(rho: DensityMatrix, kraus_set: KrausSet,
                        grouping: NoiseGrouping | None = None) -> DensityMatrix:
    """Sum over one Kraus index per group, in lexicographic index order."""
    grouping = grouping or NoiseGrouping.correlated()
    grouping.check(rho.num_qubits)
    out = np.zeros_like(rho.matrix)
    for indices in itertools.product(range(len(kraus_set)), repeat=len(grouping.groups)):
        term = rho.matrix
        for k, (_, qubits) in zip(indices, grouping.groups):
            for q in qubits:
                term = apply_matrix(term, kraus_set.operators[k], [q])
        out += term
    trace_kept = abs(np.trace(out).real - 1) <= ATOL
    return DensityMatrix(out, normalized=trace_kept)
