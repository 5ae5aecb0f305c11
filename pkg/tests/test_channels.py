import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbrsp.channels import (CAO_AN, COMP, NOISE_STUDY, PLUS_MINUS, Bell, CharlieBasis,
                            FiveQubitChannelSpec, GhzKind, InvalidChannelSpec, SevenQubitChannelSpec,
                            enumerate_five_qubit_specs, enumerate_seven_qubit_specs,
                            ghz_from_bell_and_ancilla, make_bell, make_five_qubit_channel, make_ghz,
                            make_seven_qubit_channel, parse_channel)
from cbrsp.qmath import CNOT, StateVector, apply_on_qubits, measure_in_basis, permute_qubits

s = 1 / np.sqrt(2)


def ket(bits):
    return StateVector.basis(bits).amplitudes


def test_bell_labels():
    assert np.abs(make_bell(Bell.PSI_PLUS).amplitudes - s * (ket("00") + ket("11"))).max() < 1e-15
    assert np.abs(make_bell(Bell.PSI_MINUS).amplitudes - s * (ket("00") - ket("11"))).max() < 1e-15
    assert np.abs(make_bell(Bell.PHI_PLUS).amplitudes - s * (ket("01") + ket("10"))).max() < 1e-15
    assert np.abs(make_bell(Bell.PHI_MINUS).amplitudes - s * (ket("01") - ket("10"))).max() < 1e-15


def test_ghz_definition():
    g = make_ghz(GhzKind(1, -1)).amplitudes
    assert np.abs(g - s * (ket("001") - ket("110"))).max() < 1e-15


@pytest.mark.parametrize("bell", list(Bell))
@pytest.mark.parametrize("ancilla", [0, 1])
def test_ghz_from_bell_matches_cnot(bell, ancilla):
    # Bell on (S, R), ancilla S' appended, reordered to S S' R, then CNOT S -> S'
    state = make_bell(bell).tensor(StateVector.basis(str(ancilla)))
    state = permute_qubits(state, [0, 2, 1])
    state = apply_on_qubits(state, CNOT, [0, 1])
    g = ghz_from_bell_and_ancilla(bell, ancilla)
    assert np.abs(state.amplitudes - make_ghz(g).amplitudes).max() < 1e-15
    assert g.high == (ancilla == 1)


def test_invalid_specs_rejected():
    with pytest.raises(InvalidChannelSpec):
        FiveQubitChannelSpec(Bell.PSI_PLUS, Bell.PHI_PLUS, Bell.PSI_PLUS, Bell.PHI_MINUS)
    with pytest.raises(InvalidChannelSpec):
        FiveQubitChannelSpec(Bell.PSI_PLUS, Bell.PHI_PLUS, Bell.PSI_MINUS, Bell.PHI_PLUS)
    with pytest.raises(InvalidChannelSpec):
        FiveQubitChannelSpec(Bell.PSI_PLUS, Bell.PHI_PLUS, Bell.PSI_MINUS, Bell.PHI_MINUS, sign=2)
    with pytest.raises(InvalidChannelSpec):
        GhzKind(4)
    with pytest.raises(InvalidChannelSpec):
        SevenQubitChannelSpec(GhzKind(0), GhzKind(1), GhzKind(0), GhzKind(1, -1))


def test_enumeration_counts():
    for basis in (COMP, PLUS_MINUS):
        specs = enumerate_five_qubit_specs(basis)
        assert len(specs) == 144
        assert len(set(map(str, specs))) == 144
    # brute force over all 4^4 assignments agrees with the enumeration
    brute = [p for p in itertools.product(Bell, repeat=4) if p[0] != p[2] and p[1] != p[3]]
    assert len(brute) == 144
    for family in ("low", "high"):
        specs = enumerate_seven_qubit_specs(family)
        assert len(specs) == 144
        assert all(sp.family == family for sp in specs)


def test_cao_an_matches_four_term_state():
    # |Q> = (|00000> + |01011> + |10101> + |11110>)/2 on A1 A2 B1 B2 C1
    q = 0.5 * (ket("00000") + ket("01011") + ket("10101") + ket("11110"))
    # S1 R1 S2 R2 C1 = A1 B1 A2 B2 C1
    q = permute_qubits(StateVector(q), [0, 2, 1, 3, 4]).amplitudes
    assert np.abs(make_five_qubit_channel(CAO_AN).amplitudes - q).max() < 1e-15


def test_noise_study_channel():
    psi_p = make_bell(Bell.PSI_PLUS).amplitudes
    phi_m = make_bell(Bell.PHI_MINUS).amplitudes
    ref = s * (np.kron(np.kron(psi_p, psi_p), [1, 0]) + np.kron(np.kron(phi_m, phi_m), [0, 1]))
    assert np.abs(make_five_qubit_channel(NOISE_STUDY).amplitudes - ref).max() < 1e-15


@pytest.mark.parametrize("spec", enumerate_five_qubit_specs(PLUS_MINUS)[::13])
@pytest.mark.parametrize("c", [0, 1])
def test_controller_outcome_leaves_bell_pairs(spec, c):
    m = measure_in_basis(make_five_qubit_channel(spec), 4, spec.charlie, forced=c)
    assert abs(m.probability - 0.5) < 1e-12
    b1, b2 = spec.bells(c)
    expected = np.kron(np.kron(make_bell(b1).amplitudes, make_bell(b2).amplitudes), spec.charlie[c])
    assert abs(abs(np.vdot(expected, m.state.amplitudes)) - 1) < 1e-12


def test_seven_from_five_matches_cnots():
    spec = enumerate_five_qubit_specs(PLUS_MINUS)[57]
    for anc in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        state = make_five_qubit_channel(spec).tensor(StateVector.basis(f"{anc[0]}{anc[1]}"))
        # S1 R1 S2 R2 C1 S1' S2' -> S1 S1' R1 S2 S2' R2 C1
        state = permute_qubits(state, [0, 5, 1, 2, 6, 3, 4])
        state = apply_on_qubits(state, CNOT, [0, 1])
        state = apply_on_qubits(state, CNOT, [3, 4])
        seven = make_seven_qubit_channel(SevenQubitChannelSpec.from_five(spec, anc))
        assert np.abs(state.amplitudes - seven.amplitudes).max() < 1e-15


def test_mixed_family():
    spec = SevenQubitChannelSpec.from_five(NOISE_STUDY, (0, 1))
    assert spec.family == "mixed"


def test_charlie_basis_parse():
    assert CharlieBasis.parse("comp") == COMP
    b = CharlieBasis.parse("angles:1.5707963267948966:0")
    # second vector is -|-> here, so compare up to a global phase
    assert abs(abs(np.vdot(b.first, PLUS_MINUS.first)) - 1) < 1e-12
    assert abs(abs(np.vdot(b.second, PLUS_MINUS.second)) - 1) < 1e-12
    with pytest.raises(InvalidChannelSpec):
        CharlieBasis.parse("diag")


@given(st.sampled_from(enumerate_five_qubit_specs()), st.sampled_from([1, -1]),
       st.sampled_from(["comp", "pm", "angles:0.3:1.2"]))
def test_five_spec_round_trip(spec, sign, basis):
    spec = FiveQubitChannelSpec(spec.psi1, spec.psi2, spec.psi3, spec.psi4, sign,
                                CharlieBasis.parse(basis))
    back = parse_channel(str(spec))
    assert back == spec and str(back) == str(spec)
    assert abs(np.linalg.norm(make_five_qubit_channel(spec).amplitudes) - 1) < 1e-12


@given(st.sampled_from(enumerate_seven_qubit_specs("low") + enumerate_seven_qubit_specs("high")))
def test_seven_spec_round_trip(spec):
    assert parse_channel(str(spec)) == spec


def test_presets_by_name():
    assert parse_channel("cao-an") == CAO_AN
    assert str(NOISE_STUDY) == "psi+,psi+,phi-,phi-;+;comp"
    with pytest.raises(InvalidChannelSpec):
        parse_channel("psi+,psi+;+;comp")
