"""Dense complex linear algebra for small multi-qubit registers.

Qubit 0 is the leftmost ket label and the most significant bit of the
basis index, so ``|q0 q1 ... q_{n-1}>`` has index ``sum q_k 2**(n-1-k)``.
Operators are plain ``numpy`` arrays; states are wrapped in small frozen
containers that validate their invariants on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .tolerances import ATOL, PROB_FLOOR, PSD_FLOOR

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class QMathError(ValueError):
    """Raised for malformed operators, states or qubit index lists."""


class ImpossibleOutcome(QMathError):
    """A forced measurement outcome has (numerically) zero probability."""


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise QMathError(f"dimension {dim} is not a power of two")
    return n


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise QMathError(f"duplicate qubit index in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise QMathError(f"qubit index {t} out of range for {n} qubits")
    return targets


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _num_qubits(amps.size)
        norm = np.vdot(amps, amps).real
        if abs(norm - 1) > ATOL:
            raise QMathError(f"state not normalized: <psi|psi> = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm < PROB_FLOOR:
            raise QMathError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis state from a bit string such as ``"010"``."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(amps)

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.amplitudes.size)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian positive semidefinite operator on ``num_qubits`` qubits.

    ``normalized=False`` marks intermediates of post-selection or of
    trace-decreasing noise; their trace lies in ``[0, 1]`` and is never
    rescaled behind the caller's back.
    """

    matrix: np.ndarray
    normalized: bool = True
    check_psd: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QMathError(f"density matrix must be square, got {m.shape}")
        _num_qubits(m.shape[0])
        if np.abs(m - m.conj().T).max() > ATOL:
            raise QMathError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if self.normalized:
            if abs(tr - 1) > ATOL:
                raise QMathError(f"trace {tr!r} != 1 for a normalized density matrix")
        elif not -ATOL <= tr <= 1 + ATOL:
            raise QMathError(f"trace {tr!r} outside [0, 1]")
        if self.check_psd:
            lowest = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
            if lowest < -PSD_FLOOR:
                raise QMathError(f"density matrix not PSD (eigenvalue {lowest!r})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.matrix.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalize(self) -> "DensityMatrix":
        tr = self.trace
        if tr < PROB_FLOOR:
            raise ImpossibleOutcome(f"cannot normalize, trace = {tr!r}")
        return DensityMatrix(self.matrix / tr)


@dataclass(frozen=True, eq=False)
class SingleQubitBasis:
    """Orthonormal pair of single-qubit kets; outcome 0 is ``first``."""

    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        a = np.array(self.first, dtype=complex).reshape(-1)
        b = np.array(self.second, dtype=complex).reshape(-1)
        if a.size != 2 or b.size != 2:
            raise QMathError("basis vectors must have two components")
        gram = np.array([[np.vdot(a, a), np.vdot(a, b)], [np.vdot(b, a), np.vdot(b, b)]])
        if np.abs(gram - np.eye(2)).max() > ATOL:
            raise QMathError("basis vectors are not orthonormal")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "first", a)
        object.__setattr__(self, "second", b)

    def __getitem__(self, outcome: int) -> np.ndarray:
        if outcome not in (0, 1):
            raise IndexError(outcome)
        return self.first if outcome == 0 else self.second

    def projector(self, outcome: int) -> np.ndarray:
        v = self[outcome]
        return np.outer(v, v.conj())


COMPUTATIONAL = SingleQubitBasis(KET0, KET1)
HADAMARD = SingleQubitBasis(KET_PLUS, KET_MINUS)


def tensor_product(*ops) -> np.ndarray:
    """Kronecker product, leftmost factor on the most significant qubits."""
    if not ops:
        raise QMathError("tensor_product needs at least one factor")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def _apply_tensor(tensor: np.ndarray, op: np.ndarray, targets: tuple[int, ...],
                  offset: int = 0) -> np.ndarray:
    # tensor has shape (2,)*n (or (2,)*2n for a matrix); acts on axes offset+targets
    k = len(targets)
    op_t = op.reshape((2,) * (2 * k))
    axes = [offset + t for t in targets]
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _check_op(op, n_targets: int) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (2 ** n_targets, 2 ** n_targets):
        raise QMathError(f"operator shape {op.shape} does not act on {n_targets} qubit(s)")
    return op


def apply_matrix(matrix: np.ndarray, op, targets: Sequence[int]) -> np.ndarray:
    """``K rho K^dagger`` on a raw square array, for any (not necessarily unitary) ``K``."""
    n = _num_qubits(matrix.shape[0])
    targets = _check_targets(targets, n)
    op = _check_op(op, len(targets))
    t = matrix.reshape((2,) * (2 * n))
    t = _apply_tensor(t, op, targets)
    t = _apply_tensor(t, op.conj(), targets, offset=n)
    return t.reshape(matrix.shape)


def apply_on_qubits(state, op, targets: Sequence[int]):
    """Apply ``op`` to the listed qubits (identity elsewhere).

    ``targets`` is ordered: ``targets[0]`` is the most significant qubit of
    ``op``.  A :class:`DensityMatrix` is conjugated, ``U rho U^dagger``.
    """
    if isinstance(state, StateVector):
        n = state.num_qubits
        targets = _check_targets(targets, n)
        op = _check_op(op, len(targets))
        if not _is_unitary(op):
            raise QMathError("non-unitary operator on a pure state; use measure_in_basis")
        t = _apply_tensor(state.amplitudes.reshape((2,) * n), op, targets)
        return StateVector(t.reshape(-1))
    if isinstance(state, DensityMatrix):
        m = apply_matrix(state.matrix, op, targets)
        return DensityMatrix(m, normalized=state.normalized)
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state).__name__}")


def _is_unitary(op: np.ndarray) -> bool:
    return np.abs(op.conj().T @ op - np.eye(op.shape[0])).max() <= ATOL


def permute_qubits(state, order: Sequence[int]):
    """Reorder qubits so that new qubit ``k`` is old qubit ``order[k]``."""
    n = state.num_qubits
    order = _check_targets(order, n)
    if len(order) != n:
        raise QMathError("permutation must list every qubit once")
    if isinstance(state, StateVector):
        return StateVector(state.amplitudes.reshape((2,) * n).transpose(order).reshape(-1))
    t = state.matrix.reshape((2,) * (2 * n)).transpose(list(order) + [n + k for k in order])
    return DensityMatrix(t.reshape(state.matrix.shape), normalized=state.normalized)


def reduced_matrix(matrix: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw square array, kept qubits in the listed order."""
    n = _num_qubits(matrix.shape[0])
    keep = _check_targets(keep, n)
    if not keep:
        raise QMathError("partial trace needs at least one kept qubit")
    traced = [q for q in range(n) if q not in keep]
    t = matrix.reshape((2,) * (2 * n)).transpose(list(keep) + traced
                                                 + [n + q for q in keep] + [n + q for q in traced])
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    return np.einsum("atbt->ab", t.reshape(dk, dt, dk, dt))


def partial_trace(rho, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (a :class:`StateVector` is accepted too)."""
    if isinstance(rho, StateVector):
        n = rho.num_qubits
        keep = _check_targets(keep, n)
        if not keep:
            raise QMathError("partial trace needs at least one kept qubit")
        traced = [q for q in range(n) if q not in keep]
        psi = rho.amplitudes.reshape((2,) * n).transpose(list(keep) + traced)
        psi = psi.reshape(2 ** len(keep), -1)
        return DensityMatrix(psi @ psi.conj().T)
    return DensityMatrix(reduced_matrix(rho.matrix, keep), normalized=rho.normalized)


class Measurement(NamedTuple):
    outcome: int
    probability: float
    state: object  # same kind as the measured state, renormalized


def branch_probabilities(state, qubit: int, basis: SingleQubitBasis) -> tuple[float, float]:
    probs = []
    for k in (0, 1):
        proj = basis.projector(k)
        if isinstance(state, StateVector):
            n = state.num_qubits
            _check_targets([qubit], n)
            v = _apply_tensor(state.amplitudes.reshape((2,) * n), proj, (qubit,))
            probs.append(float(np.vdot(v, v).real))
        else:
            m = apply_matrix(state.matrix, proj, [qubit])
            probs.append(float(np.trace(m).real))
    return probs[0], probs[1]


def measure_in_basis(state, qubit: int, basis: SingleQubitBasis,
                     forced: int | None = None, rng=None) -> Measurement:
    """Projective measurement of one qubit in ``basis``.

    With ``forced`` the given outcome is selected (its probability must
    exceed ``PROB_FLOOR``); otherwise the outcome is sampled from ``rng``
    (a ``numpy.random.Generator`` or a seed).  The measured qubit stays in
    the register, collapsed onto the observed basis vector.

    For an unnormalized density matrix the probabilities are relative to
    its trace.
    """
    p0, p1 = branch_probabilities(state, qubit, basis)
    total = p0 + p1
    if total < PROB_FLOOR:
        raise ImpossibleOutcome("measured state has zero norm")
    probs = (p0 / total, p1 / total)
    if forced is None:
        rng = np.random.default_rng(rng)
        outcome = int(rng.random() >= probs[0])
    else:
        if forced not in (0, 1):
            raise QMathError(f"outcome must be 0 or 1, got {forced!r}")
        outcome = forced
    p = probs[outcome]
    if p < PROB_FLOOR:
        raise ImpossibleOutcome(f"outcome {outcome} on qubit {qubit} has probability {p!r}")
    proj = basis.projector(outcome)
    if isinstance(state, StateVector):
        n = state.num_qubits
        v = _apply_tensor(state.amplitudes.reshape((2,) * n), proj, (qubit,)).reshape(-1)
        post = StateVector.from_unnormalized(v)
    else:
        m = apply_matrix(state.matrix, proj, [qubit])
        post = DensityMatrix(m / np.trace(m).real)
    return Measurement(outcome, p, post)


def fidelity_pure_vs_mixed(target: StateVector, rho: DensityMatrix) -> float:
    """``<T|rho|T>`` (the squared Uhlmann fidelity for a pure target)."""
    if target.amplitudes.size != rho.matrix.shape[0]:
        raise QMathError("target and density matrix dimensions differ")
    f = np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)
    if abs(f.imag) > ATOL:
        raise QMathError(f"fidelity has imaginary residue {f.imag!r}")
    return float(f.real)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = ATOL) -> bool:
    """True when ``|<u|v>| = |u| |v|``; global phases are never compared."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    return abs(abs(np.vdot(u, v)) - np.linalg.norm(u) * np.linalg.norm(v)) <= atol
