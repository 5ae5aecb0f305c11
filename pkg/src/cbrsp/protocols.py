"""Noiseless controlled bidirectional remote state preparation.

Three protocols run as explicit three-party (or five-party, for the joint
variant) exchanges over a channel distributed by the controller Charlie:

* probabilistic CBRSP: one rotated measurement and one broadcast bit per
  sender, success only on the ``q2`` outcome;
* deterministic CBRSP: each sender CNOTs onto a local ancilla, measures in
  the amplitude basis, conditionally applies the phase gate and measures
  the ancilla in the phase basis (two bits);
* CJBRSP: the same two measurements split between an amplitude holder and a
  phase holder for each direction, on a seven-qubit GHZ channel.

Every run yields a :class:`ProtocolTranscript`.  Outcomes are chosen by an
outcome policy: :class:`Forced`, :class:`Sampled` or :class:`EnumerateAll`.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import channels as ch
from .channels import Bell, FiveQubitChannelSpec, GhzKind, SevenQubitChannelSpec
from .qmath import (KET0, I2, X, Z, CNOT, DensityMatrix, ImpossibleOutcome, SingleQubitBasis,
                    StateVector, apply_on_qubits, fidelity_pure_vs_mixed, measure_in_basis,
                    partial_trace)

AB = "A->B"
BA = "B->A"
DIRECTIONS = (AB, BA)

TWO_PI = 2 * math.pi


class ProtocolFailure(Exception):
    """The sender's outcome leaves no receiver correction (probabilistic ``q1`` branch)."""


@dataclass(frozen=True)
class TargetState:
    """``sin(theta)|0> + cos(theta) e^{i phi}|1>`` with theta in [0, pi/2]."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (-1e-12 <= theta <= math.pi / 2 + 1e-12) or not math.isfinite(phi):
            raise ValueError(f"theta must lie in [0, pi/2] and phi be finite, got ({theta}, {phi})")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi / 2))
        object.__setattr__(self, "phi", phi % TWO_PI)

    @property
    def a(self) -> float:
        return math.sin(self.theta)

    @property
    def b(self) -> float:
        return math.cos(self.theta)

    def vector(self) -> StateVector:
        return StateVector(np.array([self.a, self.b * np.exp(1j * self.phi)]))

    def amplitude_only(self) -> "TargetState":
        """What an amplitude holder knows: theta, with the phase hidden."""
        return TargetState(self.theta, 0.0)

    def phase_only(self) -> "TargetState":
        """What a phase holder knows: phi, with the amplitude hidden."""
        return TargetState(math.pi / 4, self.phi)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "phi": self.phi}


def rsp_basis(target: TargetState) -> SingleQubitBasis:
    """``{q1, q2}``: q1 is the target itself, q2 its orthogonal partner."""
    a, b, e = target.a, target.b, np.exp(1j * target.phi)
    return SingleQubitBasis([a, b * e], [b * np.conj(e), -a])


def amplitude_basis(target: TargetState) -> SingleQubitBasis:
    a, b = target.a, target.b
    return SingleQubitBasis([a, b], [b, -a])


def phase_basis(target: TargetState) -> SingleQubitBasis:
    e = np.exp(1j * target.phi)
    s = 1 / math.sqrt(2)
    return SingleQubitBasis([s, s * e], [s * np.conj(e), -s])


def phase_gate(target: TargetState) -> np.ndarray:
    return np.diag([1, np.exp(2j * target.phi)]).astype(complex)


class Correction(enum.Enum):
    I = "I"
    X = "X"
    IY = "iY"
    Z = "Z"

    @property
    def matrix(self) -> np.ndarray:
        return _CORRECTION_MATRICES[self]

    def __str__(self):
        return self.value


# iY = [[0, 1], [-1, 0]] = ZX; tables are only meaningful up to global phase
_CORRECTION_MATRICES = {
    Correction.I: I2,
    Correction.X: X,
    Correction.IY: Z @ X,
    Correction.Z: Z,
}

_P, _M, _F, _G = Bell.PSI_PLUS, Bell.PSI_MINUS, Bell.PHI_PLUS, Bell.PHI_MINUS
_I, _X, _Y, _Z = Correction.I, Correction.X, Correction.IY, Correction.Z

TABLE1 = {_P: _Y, _M: _X, _F: _Z, _G: _I}

TABLE2 = {  # (u, v) -> shared Bell pair -> receiver's operation
    (0, 0): {_P: _I, _M: _Z, _F: _X, _G: _Y},
    (0, 1): {_P: _Z, _M: _I, _F: _Y, _G: _X},
    (1, 0): {_P: _Y, _M: _X, _F: _Z, _G: _I},
    (1, 1): {_P: _X, _M: _Y, _F: _I, _G: _Z},
}

# columns: GHZ^{0+}/GHZ^{2+}, GHZ^{0-}/GHZ^{2-}, GHZ^{1+}/GHZ^{3+}, GHZ^{1-}/GHZ^{3-}
TABLE3 = {
    (0, 0): (_I, _Z, _X, _Y),
    (0, 1): (_Z, _I, _Y, _X),
    (1, 0): (_Y, _X, _Z, _I),
    (1, 1): (_X, _Y, _I, _Z),
}

del _P, _M, _F, _G, _I, _X, _Y, _Z


def table1_correction(bell: Bell, sender_outcome: int = 1) -> Correction:
    """Receiver's operation after the sender saw ``q2`` (outcome 1)."""
    if sender_outcome != 1:
        raise ProtocolFailure("sender obtained q1: the remote preparation fails")
    return TABLE1[bell]


def table2_correction(bell: Bell, u: int, v: int) -> Correction:
    return TABLE2[(u, v)][bell]


def _table3_column(ghz: GhzKind) -> int:
    return 2 * (ghz.x % 2) + (0 if ghz.sign > 0 else 1)


def table3_correction(ghz: GhzKind, u: int, v: int) -> Correction:
    return TABLE3[(u, v)][_table3_column(ghz)]


def applies_phase_gate(ghz: GhzKind, u: int) -> bool:
    """Sender2's rule: Pi after u0 on the ancilla-|0> family, after u1 on the ancilla-|1> family."""
    return u == (1 if ghz.high else 0)


# --- outcome policies -------------------------------------------------------

@dataclass(frozen=True)
class Forced:
    """Outcome index for every measurement, in the protocol's canonical key order."""

    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))
        if any(o not in (0, 1) for o in self.outcomes):
            raise ValueError(f"forced outcomes must be 0/1, got {self.outcomes}")


@dataclass(frozen=True)
class Sampled:
    seed: int | None = None


@dataclass(frozen=True)
class EnumerateAll:
    pass


OutcomePolicy = Union[Forced, Sampled, EnumerateAll]

PROBABILISTIC_KEYS = ("Alice", "Bob", "Charlie")
DETERMINISTIC_KEYS = ("Alice.u", "Alice.v", "Bob.u", "Bob.v", "Charlie")
JOINT_KEYS = ("A->B.u", "A->B.v", "B->A.u", "B->A.v", "Charlie")


# --- transcript -------------------------------------------------------------

def _matrix_to_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


@dataclass
class MeasurementEvent:
    party: str
    qubit: str
    basis: str
    outcome: str
    index: int
    probability: float


@dataclass
class Broadcast:
    party: str
    bits: tuple[int, ...]


@dataclass
class LocalOperation:
    party: str
    op: str
    qubits: tuple[str, ...]
    applied: bool = True
    waited_for_controller: bool = False


@dataclass
class CorrectionEvent:
    party: str
    direction: str
    qubit: str
    op: str


@dataclass
class ProtocolTranscript:
    protocol: str
    channel: str
    targets: dict[str, TargetState]
    holders: dict[str, tuple[str, ...]]
    measurements: list[MeasurementEvent] = field(default_factory=list)
    broadcasts: list[Broadcast] = field(default_factory=list)
    local_operations: list[LocalOperation] = field(default_factory=list)
    corrections: list[CorrectionEvent] = field(default_factory=list)
    outputs: dict[str, np.ndarray] = field(default_factory=dict)
    success: dict[str, bool] = field(default_factory=dict)
    fidelity: dict[str, float | None] = field(default_factory=dict)

    @property
    def probability(self) -> float:
        return math.prod(m.probability for m in self.measurements)

    @property
    def classical_bits(self) -> int:
        return sum(len(b.bits) for b in self.broadcasts)

    def bits_sent_by(self, party: str) -> int:
        return sum(len(b.bits) for b in self.broadcasts if b.party == party)

    def outcome(self, party: str, qubit: str) -> int:
        for m in self.measurements:
            if m.party == party and m.qubit == qubit:
                return m.index
        raise KeyError((party, qubit))

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "channel": self.channel,
            "targets": {d: t.to_dict() for d, t in self.targets.items()},
            "holders": {p: list(q) for p, q in self.holders.items()},
            "measurements": [vars(m).copy() for m in self.measurements],
            "broadcasts": [{"party": b.party, "bits": list(b.bits)} for b in self.broadcasts],
            "local_operations": [dict(vars(o), qubits=list(o.qubits)) for o in self.local_operations],
            "corrections": [vars(c).copy() for c in self.corrections],
            "outputs": {d: _matrix_to_json(m) for d, m in self.outputs.items()},
            "success": dict(self.success),
            # rounded to the exactness tolerance so documents print 1.0, not 0.9999999999999998
            "fidelity": {d: None if f is None else round(f, 12) for d, f in self.fidelity.items()},
            "probability": self.probability,
            "classical_bits": self.classical_bits,
        }


# --- engine -----------------------------------------------------------------

class _Run:
    """Sequential executor: the register, its qubit names and the transcript under construction."""

    def __init__(self, state: StateVector, qubits, keys, policy, transcript: ProtocolTranscript):
        self.state = state
        self.qubits = list(qubits)
        self.keys = keys
        self.transcript = transcript
        if isinstance(policy, Forced):
            if len(policy.outcomes) != len(keys):
                raise ValueError(f"{transcript.protocol} needs {len(keys)} forced outcomes "
                                 f"{keys}, got {len(policy.outcomes)}")
            self._forced = dict(zip(keys, policy.outcomes))
            self._rng = None
        elif isinstance(policy, Sampled):
            self._forced = None
            self._rng = np.random.default_rng(policy.seed)
        else:
            raise TypeError(f"unsupported policy {policy!r}")

    def index(self, name: str) -> int:
        return self.qubits.index(name)

    def measure(self, key: str, party: str, qubit: str, basis: SingleQubitBasis,
                basis_name: str, labels: tuple[str, str]) -> int:
        forced = None if self._forced is None else self._forced[key]
        m = measure_in_basis(self.state, self.index(qubit), basis, forced=forced, rng=self._rng)
        self.state = m.state
        self.transcript.measurements.append(
            MeasurementEvent(party, qubit, basis_name, labels[m.outcome], m.outcome, m.probability))
        return m.outcome

    def broadcast(self, party: str, *bits: int):
        self.transcript.broadcasts.append(Broadcast(party, tuple(bits)))

    def local(self, party: str, name: str, op: np.ndarray | None, qubits: tuple[str, ...],
              applied: bool = True, waited: bool = False):
        if applied:
            self.state = apply_on_qubits(self.state, op, [self.index(q) for q in qubits])
        self.transcript.local_operations.append(LocalOperation(party, name, qubits, applied, waited))

    def finish(self, direction: str, receiver: str, qubit: str, target: TargetState,
               correction: Correction | None):
        rho = partial_trace(self.state, [self.index(qubit)]).matrix
        t = self.transcript
        if correction is not None:
            c = correction.matrix
            rho = c @ rho @ c.conj().T
            t.corrections.append(CorrectionEvent(receiver, direction, qubit, str(correction)))
            t.fidelity[direction] = fidelity_pure_vs_mixed(target.vector(), DensityMatrix(rho))
        else:
            t.fidelity[direction] = None
        t.success[direction] = correction is not None
        t.outputs[direction] = rho


def _dispatch(fn: Callable, keys: tuple[str, ...], policy: OutcomePolicy):
    if isinstance(policy, EnumerateAll):
        runs = []
        for combo in itertools.product((0, 1), repeat=len(keys)):
            try:
                runs.append(fn(Forced(combo)))
            except ImpossibleOutcome:
                continue
        return runs
    return fn(policy)


def _new_transcript(protocol, spec, target_ab, target_ba, holders) -> ProtocolTranscript:
    return ProtocolTranscript(protocol=protocol, channel=str(spec),
                              targets={AB: target_ab, BA: target_ba}, holders=holders)


_Q = ("q1", "q2")
_U = ("u0", "u1")
_V = ("v0", "v1")
_C = ("a", "b")

_CBRSP_HOLDERS = {"Alice": ("S1", "R2"), "Bob": ("R1", "S2"), "Charlie": ("C1",)}


def run_probabilistic_cbrsp(spec: FiveQubitChannelSpec, target_ab: TargetState,
                            target_ba: TargetState, policy: OutcomePolicy = EnumerateAll()):
    """Probabilistic CBRSP; forced outcomes are ordered (Alice, Bob, Charlie).

    Returns one transcript, or a list of every possible branch under
    :class:`EnumerateAll`.
    """
    def once(p):
        t = _new_transcript("probabilistic", spec, target_ab, target_ba, dict(_CBRSP_HOLDERS))
        run = _Run(ch.make_five_qubit_channel(spec), ch.FIVE_QUBIT_ORDER, PROBABILISTIC_KEYS, p, t)
        qa = run.measure("Alice", "Alice", "S1", rsp_basis(target_ab), "q", _Q)
        run.broadcast("Alice", qa)
        qb = run.measure("Bob", "Bob", "S2", rsp_basis(target_ba), "q", _Q)
        run.broadcast("Bob", qb)
        c = run.measure("Charlie", "Charlie", "C1", spec.charlie, "ab", _C)
        run.broadcast("Charlie", c)
        bell_ab, bell_ba = spec.bells(c)
        run.finish(AB, "Bob", "R1", target_ab, TABLE1[bell_ab] if qa == 1 else None)
        run.finish(BA, "Alice", "R2", target_ba, TABLE1[bell_ba] if qb == 1 else None)
        return t

    return _dispatch(once, PROBABILISTIC_KEYS, policy)


def run_deterministic_cbrsp(spec: FiveQubitChannelSpec, target_ab: TargetState,
                            target_ba: TargetState, policy: OutcomePolicy = EnumerateAll()):
    """Deterministic CBRSP; forced outcomes are ordered (Alice u, Alice v, Bob u, Bob v, Charlie)."""
    holders = {"Alice": ("S1", "S1'", "R2"), "Bob": ("R1", "S2", "S2'"), "Charlie": ("C1",)}
    qubits = ch.FIVE_QUBIT_ORDER + ("S1'", "S2'")

    def once(p):
        t = _new_transcript("deterministic", spec, target_ab, target_ba, holders)
        state = ch.make_five_qubit_channel(spec).tensor(StateVector(np.kron(KET0, KET0)))
        run = _Run(state, qubits, DETERMINISTIC_KEYS, p, t)
        outcomes = {}
        for party, s, anc, target in (("Alice", "S1", "S1'", target_ab),
                                      ("Bob", "S2", "S2'", target_ba)):
            run.local(party, "CNOT", CNOT, (s, anc))
            u = run.measure(f"{party}.u", party, s, amplitude_basis(target), "u", _U)
            run.local(party, "Pi", phase_gate(target), (anc,), applied=u == 0)
            v = run.measure(f"{party}.v", party, anc, phase_basis(target), "v", _V)
            run.broadcast(party, u, v)
            outcomes[party] = (u, v)
        c = run.measure("Charlie", "Charlie", "C1", spec.charlie, "ab", _C)
        run.broadcast("Charlie", c)
        bell_ab, bell_ba = spec.bells(c)
        run.finish(AB, "Bob", "R1", target_ab, table2_correction(bell_ab, *outcomes["Alice"]))
        run.finish(BA, "Alice", "R2", target_ba, table2_correction(bell_ba, *outcomes["Bob"]))
        return t

    return _dispatch(once, DETERMINISTIC_KEYS, policy)


@dataclass(frozen=True)
class KnowledgeSplit:
    """Names of the amplitude holder (Sender1) and phase holder (Sender2) per direction.

    The amplitude holder only ever sees ``theta`` and the phase holder only
    ``phi``; receivers are Bob (A->B) and Alice (B->A).
    """

    ab_amplitude: str = "Alice"
    ab_phase: str = "Alice'"
    ba_amplitude: str = "Bob"
    ba_phase: str = "Bob'"


def run_cjbrsp(spec: SevenQubitChannelSpec, target_ab: TargetState, target_ba: TargetState,
               split: KnowledgeSplit = KnowledgeSplit(), policy: OutcomePolicy = EnumerateAll()):
    """Controlled joint bidirectional RSP over a seven-qubit GHZ channel.

    Forced outcomes are ordered (A->B u, A->B v, B->A u, B->A v, Charlie).
    When the two GHZ states a direction may share call for different phase
    gate decisions, the phase holder waits for Charlie's broadcast.
    """
    holders: dict[str, tuple[str, ...]] = {}
    for party, qubit in ((split.ab_amplitude, "S1"), (split.ab_phase, "S1'"), ("Bob", "R1"),
                         (split.ba_amplitude, "S2"), (split.ba_phase, "S2'"), ("Alice", "R2"),
                         ("Charlie", "C1")):
        holders[party] = holders.get(party, ()) + (qubit,)
    legs = (
        (AB, split.ab_amplitude, split.ab_phase, "S1", "S1'", "Bob", "R1", target_ab,
         (spec.ghz1, spec.ghz3)),
        (BA, split.ba_amplitude, split.ba_phase, "S2", "S2'", "Alice", "R2", target_ba,
         (spec.ghz2, spec.ghz4)),
    )

    def once(p):
        t = _new_transcript("cjbrsp", spec, target_ab, target_ba, holders)
        run = _Run(ch.make_seven_qubit_channel(spec), ch.SEVEN_QUBIT_ORDER, JOINT_KEYS, p, t)
        charlie = []

        def controller() -> int:
            if not charlie:
                c = run.measure("Charlie", "Charlie", "C1", spec.charlie, "ab", _C)
                run.broadcast("Charlie", c)
                charlie.append(c)
            return charlie[0]

        us = {}
        for direction, s1, _, s, _, _, _, target, _ in legs:
            us[direction] = run.measure(f"{direction}.u", s1, s, amplitude_basis(target.amplitude_only()),
                                        "u", _U)
            run.broadcast(s1, us[direction])
        vs = {}
        for direction, _, s2, _, anc, _, _, target, candidates in legs:
            u = us[direction]
            decisions = {applies_phase_gate(g, u) for g in candidates}
            waited = len(decisions) > 1
            if waited:
                apply_pi = applies_phase_gate(candidates[controller()], u)
            else:
                apply_pi = decisions.pop()
            known = target.phase_only()
            run.local(s2, "Pi", phase_gate(known), (anc,), applied=apply_pi, waited=waited)
            vs[direction] = run.measure(f"{direction}.v", s2, anc, phase_basis(known), "v", _V)
            run.broadcast(s2, vs[direction])
        c = controller()
        for direction, _, _, _, _, receiver, r, target, candidates in legs:
            ghz = candidates[c]
            run.finish(direction, receiver, r, target,
                       table3_correction(ghz, us[direction], vs[direction]))
        return t

    return _dispatch(once, JOINT_KEYS, policy)
