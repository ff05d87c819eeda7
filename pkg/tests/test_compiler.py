import json
import math

import numpy as np
import pytest

from fequbit import (
    CircuitParseError,
    Drift,
    Gate,
    Pulse,
    Schedule,
    basis_state,
    compile_circuit,
    compile_gate,
    derive_beam,
    effective_qubit_gate,
    euler_xyx,
    gate_fidelity,
    parse_circuit,
    project_qubit,
    simulate_schedule,
    unparse,
)
from fequbit.qubit import pinem_rotation
from oracles import haar_unitary

BEAM = derive_beam(200e3, 800e-9)


def reconstruct_xyx(a, b, c, phase):
    """2x2 multiplication oracle for the decomposition."""
    f = np.diag([1, 1j])
    ry = f @ pinem_rotation(b) @ (f @ f @ f)
    return phase * pinem_rotation(a) @ ry @ pinem_rotation(c)


# ---------------------------------------------------------------- parser

def test_parse_two_gates():
    circuit = parse_circuit("H\nX\n")
    assert len(circuit.gates) == 2
    assert circuit.gates[0].kind == "H"
    assert circuit.gates[1].kind == "X"


def test_parse_rotation_with_pi_literal():
    circuit = parse_circuit("RX(0.25pi)")
    assert circuit.gates[0] == Gate("RX", angle=math.pi / 4)


def test_parse_angle_forms():
    src = "RX(pi)\nRY(-pi)\nRZ(1.5)\nrx(0.5pi)\nRZ(-0.25pi)\n"
    angles = [g.angle for g in parse_circuit(src).gates]
    assert angles == [math.pi, -math.pi, 1.5, math.pi / 2, -math.pi / 4]


def test_parse_non_unitary_matrix_rejected():
    with pytest.raises(CircuitParseError) as err:
        parse_circuit("U [[1,0],[0,2]]")
    assert "line 1" in str(err.value)
    assert "non-unitary" in str(err.value)


def test_parse_unitary_matrix():
    circuit = parse_circuit("U [[0,1j],[1j,0]]")
    m = circuit.gates[0].target_matrix()
    assert np.array_equal(m, np.array([[0, 1j], [1j, 0]]))


def test_parse_comments_blanks_crlf():
    src = "# leading comment\r\nH  # inline\r\n\r\n  X\r\n"
    circuit = parse_circuit(src)
    assert [g.kind for g in circuit.gates] == ["H", "X"]


def test_parse_unknown_mnemonic_reports_line():
    with pytest.raises(CircuitParseError) as err:
        parse_circuit("H\nBOGUS\n")
    assert "line 2" in str(err.value)


def test_parse_malformed_angle_reports_line():
    with pytest.raises(CircuitParseError) as err:
        parse_circuit("RX(splat)")
    assert "line 1" in str(err.value)


def test_parse_empty_source_rejected():
    with pytest.raises(CircuitParseError):
        parse_circuit("")
    with pytest.raises(CircuitParseError):
        parse_circuit("# only a comment\n\n")


def test_unparse_roundtrip():
    src = "H\nNOT\nRX(0.25pi)\nRZ(-1.234567890123)\nU [[0,1j],[1j,0]]\nT\n"
    circuit = parse_circuit(src)
    again = parse_circuit(unparse(circuit))
    assert again == circuit
    # and a second round is a fixed point
    assert unparse(again) == unparse(circuit)


# ---------------------------------------------------------------- euler

def test_euler_identity():
    a, b, c, phase = euler_xyx(np.eye(2))
    rec = reconstruct_xyx(a, b, c, phase)
    assert np.max(np.abs(rec - np.eye(2))) < 1e-12


def test_euler_ix_is_single_x_rotation():
    a, b, c, phase = euler_xyx(1j * np.array([[0, 1], [1, 0]]))
    assert b == pytest.approx(0.0, abs=1e-12)
    assert (a + c) % math.pi == pytest.approx(math.pi / 2, abs=1e-12)


def test_euler_hadamard_via_multiplication_oracle():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    a, b, c, phase = euler_xyx(h)
    rec = reconstruct_xyx(a, b, c, phase)
    assert np.max(np.abs(rec - h)) < 1e-12


def test_euler_rejects_non_unitary():
    with pytest.raises(ValueError):
        euler_xyx(np.array([[1, 0], [0, 2]]))


def test_euler_random_reconstruction():
    rng = np.random.default_rng(50)
    for _ in range(200):
        u = haar_unitary(rng)
        a, b, c, phase = euler_xyx(u)
        for angle in (a, b, c):
            assert -math.pi < angle <= math.pi
        rec = reconstruct_xyx(a, b, c, phase)
        assert np.max(np.abs(rec - u)) <= 1e-10


# ---------------------------------------------------------------- compile

def test_compile_rz_quarter_is_single_drift():
    schedule = compile_gate(Gate("RZ", angle=math.pi / 2), BEAM)
    assert schedule.elements == (Drift(1, BEAM.z_d / 4),)


def test_compile_z_and_s():
    z = compile_gate(Gate("Z"), BEAM)
    assert z.elements == (Drift(2, BEAM.z_d / 2),)
    s = compile_gate(Gate("S"), BEAM)
    assert s.elements == (Drift(1, BEAM.z_d / 4),)


def test_compile_x_single_pulse():
    for kind in ("X", "NOT"):
        schedule = compile_gate(Gate(kind), BEAM)
        assert schedule.elements == (Pulse(-0.25j * math.pi),)
        assert schedule.elements[0].theta == pytest.approx(math.pi / 2)


def test_compile_rz_generic_angle_uses_pulses():
    schedule = compile_gate(Gate("RZ", angle=0.3), BEAM)
    assert schedule.n_pulses >= 1
    fid = gate_fidelity(effective_qubit_gate(schedule),
                        Gate("RZ", angle=0.3).target_matrix())
    assert fid >= 1 - 1e-9


def test_compile_h_within_budget_and_faithful():
    schedule = compile_gate(Gate("H"), BEAM)
    assert schedule.n_pulses <= 3
    assert schedule.n_drifts <= 2
    fid = gate_fidelity(effective_qubit_gate(schedule), Gate("H").target_matrix())
    assert fid >= 1 - 1e-9


def test_compile_pulses_are_purely_imaginary():
    for gate in (Gate("H"), Gate("T"), Gate("RY", angle=0.9)):
        for el in compile_gate(gate, BEAM).elements:
            if isinstance(el, Pulse):
                assert el.g.real == 0.0


def test_compile_drift_lengths_follow_beam():
    other = derive_beam(80e3, 500e-9)
    schedule = compile_gate(Gate("T"), other)
    for el in schedule.elements:
        if isinstance(el, Drift):
            assert el.meters == pytest.approx(el.quarter_units * other.z_d / 4)


def test_compile_identity_like_is_empty():
    assert compile_gate(Gate("RZ", angle=0.0), BEAM).elements == ()
    assert compile_gate(Gate("RX", angle=0.0), BEAM).elements == ()


def test_compiled_global_phase_reproduces_target_exactly():
    rng = np.random.default_rng(51)
    for _ in range(20):
        u = haar_unitary(rng)
        schedule = compile_gate(Gate("U", entries=tuple(u.ravel())), BEAM)
        assert np.max(np.abs(schedule.qubit_matrix() - u)) < 1e-9


def test_compile_budget_on_random_unitaries():
    rng = np.random.default_rng(52)
    for _ in range(50):
        schedule = compile_gate(Gate("U", entries=tuple(haar_unitary(rng).ravel())), BEAM)
        assert schedule.n_pulses <= 3
        assert schedule.n_drifts <= 2
        for el in schedule.elements:
            if isinstance(el, Drift):
                assert el.quarter_units in (1, 2, 3)


# ---------------------------------------------------------------- simulate

def test_simulate_empty_schedule_is_identity():
    state = basis_state(0, 8)
    out = simulate_schedule(Schedule(()), state)
    assert out is state


def test_not_schedule_flips_qubit():
    schedule = compile_gate(Gate("NOT"), BEAM)
    out = simulate_schedule(schedule, basis_state(0, 8))
    q = project_qubit(out)
    assert abs(q.alpha) < 1e-9
    assert abs(abs(q.beta) - 1.0) < 1e-9


def test_hadamard_twice_returns_home():
    schedule = compile_gate(Gate("H"), BEAM)
    state = basis_state(0, 8)
    state = simulate_schedule(schedule, state)
    state = simulate_schedule(schedule, state)
    q = project_qubit(state)
    assert abs(abs(q.alpha) - 1.0) < 1e-9
    assert abs(q.beta) < 1e-9


def test_circuit_compilation_order():
    circuit = parse_circuit("H\nNOT\n")
    schedules = compile_circuit(circuit, BEAM)
    state = basis_state(0, 8)
    for schedule in schedules:
        state = simulate_schedule(schedule, state)
    q = project_qubit(state)
    # X H |0>_q = (1, 1)/sqrt(2) up to phase
    assert abs(q.alpha) == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert abs(q.beta) == pytest.approx(1 / math.sqrt(2), abs=1e-9)


# ---------------------------------------------------------------- fidelity

def test_gate_fidelity_values():
    x = Gate("X").target_matrix()
    z = Gate("Z").target_matrix()
    assert gate_fidelity(x, x) == 1.0
    assert gate_fidelity(1j * x, x) == pytest.approx(1.0, abs=1e-15)
    assert gate_fidelity(x, z) == 0.0


def test_gate_fidelity_rejects_non_unitary():
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(2) * 2, np.eye(2))


# ---------------------------------------------------------------- schedule

def test_schedule_json_roundtrip(tmp_path):
    schedule = compile_gate(Gate("H"), BEAM)
    again = Schedule.from_json(json.loads(json.dumps(schedule.to_json())))
    assert again == schedule
    path = tmp_path / "schedule.json"
    schedule.dump(path)
    assert Schedule.load(path) == schedule


def test_schedule_counts():
    schedule = compile_gate(Gate("T"), BEAM)
    assert schedule.n_pulses == 3
    assert schedule.n_drifts == 2
