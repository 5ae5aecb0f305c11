"""Entangled resource states: Bell pairs, GHZ variants and the controlled
five- and seven-qubit channels.

Bell labels follow the convention used throughout this package, which is
*not* the textbook one:

=========  ======================  ====================
label      state                   textbook name
=========  ======================  ====================
``psi+``   (|00> + |11>)/sqrt2     Phi+
``psi-``   (|00> - |11>)/sqrt2     Phi-
``phi+``   (|01> + |10>)/sqrt2     Psi+
``phi-``   (|01> - |10>)/sqrt2     Psi- (singlet)
=========  ======================  ====================

Five-qubit channels are ordered S1 R1 S2 R2 C1, seven-qubit channels
S1 S1' R1 S2 S2' R2 C1.  The first pair (or GHZ triple) carries the
Alice-to-Bob direction, the second one Bob-to-Alice.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import KET0, KET1, KET_MINUS, KET_PLUS, SingleQubitBasis, StateVector

S = 1 / math.sqrt(2)

FIVE_QUBIT_ORDER = ("S1", "R1", "S2", "R2", "C1")
SEVEN_QUBIT_ORDER = ("S1", "S1'", "R1", "S2", "S2'", "R2", "C1")


class InvalidChannelSpec(ValueError):
    pass


class Bell(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    @property
    def bits(self) -> tuple[int, int]:
        """``(i, j)`` of the first component ``|ij>``."""
        return (0, 0) if self in (Bell.PSI_PLUS, Bell.PSI_MINUS) else (0, 1)

    @property
    def sign(self) -> int:
        return 1 if self.value.endswith("+") else -1

    def __str__(self):
        return self.value


def make_bell(kind: Bell) -> StateVector:
    i, j = kind.bits
    amps = np.zeros(4, dtype=complex)
    amps[2 * i + j] = S
    amps[2 * (1 - i) + (1 - j)] = kind.sign * S
    return StateVector(amps)


@dataclass(frozen=True, order=True)
class GhzKind:
    """``GHZ^{x+-} = (|x> +- |7-x>)/sqrt2`` on S, S', R (x in 0..3)."""

    x: int
    sign: int = 1

    def __post_init__(self):
        if self.x not in (0, 1, 2, 3):
            raise InvalidChannelSpec(f"GHZ index must be 0..3, got {self.x!r}")
        if self.sign not in (1, -1):
            raise InvalidChannelSpec(f"GHZ sign must be +1 or -1, got {self.sign!r}")

    @property
    def high(self) -> bool:
        """True for the ancilla-|1> family GHZ^{2+-}, GHZ^{3+-}."""
        return self.x >= 2

    def __str__(self):
        return f"ghz{self.x}{'+' if self.sign > 0 else '-'}"

    @classmethod
    def parse(cls, text: str) -> "GhzKind":
        text = text.strip().lower()
        if len(text) != 5 or not text.startswith("ghz") or text[4] not in "+-":
            raise InvalidChannelSpec(f"bad GHZ label {text!r}")
        return cls(int(text[3]), 1 if text[4] == "+" else -1)


def make_ghz(kind: GhzKind) -> StateVector:
    amps = np.zeros(8, dtype=complex)
    amps[kind.x] = S
    amps[7 - kind.x] = kind.sign * S
    return StateVector(amps)


def ghz_from_bell_and_ancilla(bell: Bell, ancilla: int) -> GhzKind:
    """GHZ produced by CNOT(S -> S') on ``bell`` (S, R) with S' prepared in ``|ancilla>``."""
    if ancilla not in (0, 1):
        raise ValueError(f"ancilla must be 0 or 1, got {ancilla!r}")
    i, j = bell.bits
    return GhzKind(4 * i + 2 * (i ^ ancilla) + j, bell.sign)


@dataclass(frozen=True, eq=False)
class CharlieBasis(SingleQubitBasis):
    """Controller measurement basis {|a>, |b>} with a short label for serialization."""

    label: str = "custom"

    def __eq__(self, other):
        if not isinstance(other, CharlieBasis):
            return NotImplemented
        return (np.abs(self.first - other.first).max() < qmath.ATOL
                and np.abs(self.second - other.second).max() < qmath.ATOL)

    def __hash__(self):
        # equality is tolerance-based, so the hash cannot depend on the vectors
        return hash(CharlieBasis)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "CharlieBasis":
        """``|a> = cos(t/2)|0> + e^{i p} sin(t/2)|1>`` and its orthogonal partner."""
        a = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
        b = np.array([-np.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)])
        return cls(a, b, label=f"angles:{theta!r}:{phi!r}")

    @classmethod
    def parse(cls, text: str) -> "CharlieBasis":
        text = text.strip()
        if text in CHARLIE_PRESETS:
            return CHARLIE_PRESETS[text]
        if text.startswith("angles:"):
            try:
                _, t, p = text.split(":")
                return cls.from_angles(float(t), float(p))
            except ValueError:
                pass
        raise InvalidChannelSpec(f"unknown controller basis {text!r}")


COMP = CharlieBasis(KET0, KET1, label="comp")
PLUS_MINUS = CharlieBasis(KET_PLUS, KET_MINUS, label="pm")
CHARLIE_PRESETS = {"comp": COMP, "pm": PLUS_MINUS}


def _sign_str(sign: int) -> str:
    return "+" if sign > 0 else "-"


def _parse_sign(text: str) -> int:
    if text.strip() not in ("+", "-"):
        raise InvalidChannelSpec(f"relative sign must be '+' or '-', got {text!r}")
    return 1 if text.strip() == "+" else -1


@dataclass(frozen=True)
class FiveQubitChannelSpec:
    """``(|psi1>|psi2>|a> +- |psi3>|psi4>|b>)/sqrt2`` with psi1 != psi3, psi2 != psi4."""

    psi1: Bell
    psi2: Bell
    psi3: Bell
    psi4: Bell
    sign: int = 1
    charlie: CharlieBasis = COMP

    def __post_init__(self):
        if self.psi1 == self.psi3 or self.psi2 == self.psi4:
            raise InvalidChannelSpec(
                f"controller not entangled: need psi1 != psi3 and psi2 != psi4, got {self}")
        if self.sign not in (1, -1):
            raise InvalidChannelSpec(f"relative sign must be +1 or -1, got {self.sign!r}")

    def bells(self, controller_outcome: int) -> tuple[Bell, Bell]:
        """Pairs shared in the (A->B, B->A) directions after Charlie sees ``|a>`` (0) or ``|b>`` (1)."""
        return (self.psi1, self.psi2) if controller_outcome == 0 else (self.psi3, self.psi4)

    def __str__(self):
        return (f"{self.psi1},{self.psi2},{self.psi3},{self.psi4};"
                f"{_sign_str(self.sign)};{self.charlie.label}")

    @classmethod
    def parse(cls, text: str) -> "FiveQubitChannelSpec":
        try:
            bells, sign, basis = text.split(";")
            kinds = [Bell(b.strip().lower()) for b in bells.split(",")]
        except ValueError as exc:
            raise InvalidChannelSpec(f"bad five-qubit channel spec {text!r}") from exc
        if len(kinds) != 4:
            raise InvalidChannelSpec(f"expected four Bell labels in {text!r}")
        return cls(*kinds, sign=_parse_sign(sign), charlie=CharlieBasis.parse(basis))


def _branch_sum(first: StateVector, second: StateVector, sign: int,
                charlie: CharlieBasis) -> StateVector:
    amps = (np.kron(first.amplitudes, charlie.first)
            + sign * np.kron(second.amplitudes, charlie.second)) * S
    return StateVector(amps)


def make_five_qubit_channel(spec: FiveQubitChannelSpec) -> StateVector:
    return _branch_sum(make_bell(spec.psi1).tensor(make_bell(spec.psi2)),
                       make_bell(spec.psi3).tensor(make_bell(spec.psi4)),
                       spec.sign, spec.charlie)


CAO_AN = FiveQubitChannelSpec(Bell.PSI_PLUS, Bell.PSI_PLUS, Bell.PSI_MINUS, Bell.PSI_MINUS,
                              sign=1, charlie=PLUS_MINUS)
NOISE_STUDY = FiveQubitChannelSpec(Bell.PSI_PLUS, Bell.PSI_PLUS, Bell.PHI_MINUS, Bell.PHI_MINUS,
                                   sign=1, charlie=COMP)
FIVE_QUBIT_PRESETS = {"cao-an": CAO_AN, "noise-study": NOISE_STUDY}


@dataclass(frozen=True)
class SevenQubitChannelSpec:
    """``(|G1>|G2>|a> +- |G3>|G4>|b>)/sqrt2`` over S1 S1' R1 S2 S2' R2 C1."""

    ghz1: GhzKind
    ghz2: GhzKind
    ghz3: GhzKind
    ghz4: GhzKind
    sign: int = 1
    charlie: CharlieBasis = COMP

    def __post_init__(self):
        if self.ghz1 == self.ghz3 or self.ghz2 == self.ghz4:
            raise InvalidChannelSpec(
                f"controller not entangled: need ghz1 != ghz3 and ghz2 != ghz4, got {self}")
        if self.sign not in (1, -1):
            raise InvalidChannelSpec(f"relative sign must be +1 or -1, got {self.sign!r}")

    def ghzs(self, controller_outcome: int) -> tuple[GhzKind, GhzKind]:
        return (self.ghz1, self.ghz2) if controller_outcome == 0 else (self.ghz3, self.ghz4)

    @property
    def family(self) -> str:
        highs = {g.high for g in (self.ghz1, self.ghz2, self.ghz3, self.ghz4)}
        if highs == {False}:
            return "low"
        return "high" if highs == {True} else "mixed"

    def __str__(self):
        return (f"{self.ghz1},{self.ghz2},{self.ghz3},{self.ghz4};"
                f"{_sign_str(self.sign)};{self.charlie.label}")

    @classmethod
    def parse(cls, text: str) -> "SevenQubitChannelSpec":
        try:
            ghzs, sign, basis = text.split(";")
            kinds = [GhzKind.parse(g) for g in ghzs.split(",")]
        except ValueError as exc:
            raise InvalidChannelSpec(f"bad seven-qubit channel spec {text!r}") from exc
        if len(kinds) != 4:
            raise InvalidChannelSpec(f"expected four GHZ labels in {text!r}")
        return cls(*kinds, sign=_parse_sign(sign), charlie=CharlieBasis.parse(basis))

    @classmethod
    def from_five(cls, spec: FiveQubitChannelSpec, ancillas: tuple[int, int] = (0, 0)
                  ) -> "SevenQubitChannelSpec":
        """Channel obtained when each sender CNOTs its S qubit onto a local ancilla."""
        a1, a2 = ancillas
        return cls(ghz_from_bell_and_ancilla(spec.psi1, a1), ghz_from_bell_and_ancilla(spec.psi2, a2),
                   ghz_from_bell_and_ancilla(spec.psi3, a1), ghz_from_bell_and_ancilla(spec.psi4, a2),
                   sign=spec.sign, charlie=spec.charlie)


def make_seven_qubit_channel(spec: SevenQubitChannelSpec) -> StateVector:
    return _branch_sum(make_ghz(spec.ghz1).tensor(make_ghz(spec.ghz2)),
                       make_ghz(spec.ghz3).tensor(make_ghz(spec.ghz4)),
                       spec.sign, spec.charlie)


def parse_channel(text: str):
    """Preset name, five-qubit spec string or seven-qubit spec string."""
    text = text.strip()
    if text in FIVE_QUBIT_PRESETS:
        return FIVE_QUBIT_PRESETS[text]
    if "ghz" in text.lower():
        return SevenQubitChannelSpec.parse(text)
    return FiveQubitChannelSpec.parse(text)


def enumerate_five_qubit_specs(charlie: CharlieBasis = COMP) -> list[FiveQubitChannelSpec]:
    """All 12 x 12 admissible Bell assignments, relative sign fixed to +."""
    pairs = list(itertools.permutations(Bell, 2))
    return [FiveQubitChannelSpec(p1, p2, p3, p4, sign=1, charlie=charlie)
            for (p1, p3), (p2, p4) in itertools.product(pairs, pairs)]


GHZ_FAMILIES = {
    "low": [GhzKind(x, s) for x in (0, 1) for s in (1, -1)],
    "high": [GhzKind(x, s) for x in (2, 3) for s in (1, -1)],
}


def enumerate_seven_qubit_specs(family: str = "low", charlie: CharlieBasis = COMP
                                ) -> list[SevenQubitChannelSpec]:
    """144 channels with every GHZ drawn from the ancilla-|0> ("low") or ancilla-|1> ("high") family."""
    try:
        kinds = GHZ_FAMILIES[family]
    except KeyError:
        raise ValueError(f"family must be 'low' or 'high', got {family!r}") from None
    pairs = list(itertools.permutations(kinds, 2))
    return [SevenQubitChannelSpec(g1, g2, g3, g4, sign=1, charlie=charlie)
            for (g1, g3), (g2, g4) in itertools.product(pairs, pairs)]
