import numpy as np
import pytest

from grover_static.circuit import (
    apply_circuit,
    apply_ideal_grover,
    build_generalized_toffoli,
    build_grover_iteration,
    count_gate_slots,
    format_circuit,
    grover_frequency,
    grover_period,
)
from grover_static.exceptions import DomainError
from grover_static.statevector import QuantumState, Toffoli, apply_gate, basis_state, new_uniform_state

from oracles import controlled_x_matrix, grover_matrix, random_state


def test_grover_frequency_values():
    assert np.isclose(grover_frequency(2), np.pi / 3, atol=1e-15)
    assert abs(grover_frequency(11) - 0.0441978) < 5e-8
    assert abs(grover_frequency(40) * 2 ** 20 - 2) < 1e-9
    with pytest.raises(DomainError):
        grover_frequency(0)


def test_grover_period_values():
    assert abs(grover_period(11) - 35.54) < 0.01
    assert 34 <= round(grover_period(11)) <= 36
    assert np.isclose(grover_period(2), 1.5)


def _network_matrix(gates, n_tot):
    dim = 1 << n_tot
    cols = []
    for x in range(dim):
        s = basis_state(n_tot, x)
        for g in gates:
            apply_gate(s, g)
        cols.append(s.amplitudes)
    return np.column_stack(cols)


@pytest.mark.parametrize("n_tot", [7, 8, 9])
def test_generalized_toffoli_is_the_permutation(n_tot):
    controls = list(range(1, n_tot - 1))
    target, aux = n_tot - 1, n_tot
    gates = build_generalized_toffoli(controls, target, aux)
    assert len(gates) == 8 * (n_tot - 5)
    assert all(isinstance(g, Toffoli) for g in gates)
    ref = controlled_x_matrix(controls, target, n_tot)
    assert np.abs(_network_matrix(gates, n_tot) - ref).max() < 1e-14


def test_generalized_toffoli_truth_table_all_aux_states():
    n_tot = 12
    controls = list(range(1, 11))
    gates = build_generalized_toffoli(controls, 11, 12)
    assert len(gates) == 56
    ones = (1 << 10) - 1
    for t in (0, 1):
        for aux in (0, 1):
            x = ones | (t << 10) | (aux << 11)
            s = basis_state(n_tot, x)
            for g in gates:
                apply_gate(s, g)
            assert np.argmax(np.abs(s.amplitudes)) == ones | ((1 - t) << 10) | (aux << 11)


def test_generalized_toffoli_small_and_errors():
    assert len(build_generalized_toffoli([1, 2], 3, 4)) == 1
    with pytest.raises(IndexError):
        build_generalized_toffoli([1, 2, 3, 4, 5], 5, 6)


@pytest.mark.parametrize("n_tot", range(7, 18))
def test_slot_count_law(n_tot):
    c = build_grover_iteration(n_tot - 1, 0)
    assert count_gate_slots(c) == 12 * n_tot - 42 == c.n_g


def test_slot_count_examples():
    assert build_grover_iteration(11, 3).n_g == 102
    assert build_grover_iteration(15, 3).n_g == 150
    assert build_grover_iteration(8, 0).n_g == 66
    assert build_grover_iteration(6, 0).n_g == 42


def test_tau_range():
    with pytest.raises(DomainError):
        build_grover_iteration(4, 16)


@pytest.mark.parametrize("n_q,tau", [(1, 1), (2, 3), (3, 5), (5, 17), (7, 100)])
def test_gate_iteration_equals_matrix(n_q, tau):
    G = grover_matrix(n_q, tau)
    c = build_grover_iteration(n_q, tau)
    rng = np.random.default_rng(n_q)
    n_states = 50 if n_q == 7 else 10
    for _ in range(n_states):
        v = random_state(2 << n_q, rng)
        s = QuantumState(v.copy())
        apply_circuit(s, c)
        ref = G @ v
        overlap = abs(np.vdot(ref, s.amplitudes))
        assert overlap >= 1 - 1e-10
        assert np.abs(s.amplitudes + ref).max() < 1e-10  # gate-built = -G


def test_ideal_matches_matrix_and_amplitude_law():
    n_q, tau = 6, 9
    G = grover_matrix(n_q, tau)
    s = new_uniform_state(n_q)
    v = s.amplitudes.copy()
    theta = np.arcsin(2 ** (-n_q / 2))
    for t in range(1, 30):
        apply_ideal_grover(s, tau)
        v = G @ v
        assert np.abs(s.amplitudes - v).max() < 1e-12
        assert abs(abs(s.amplitudes[tau]) - abs(np.sin((2 * t + 1) * theta))) < 1e-10


def test_ideal_n2_finds_in_one_step():
    s = new_uniform_state(2)
    apply_ideal_grover(s, 0)
    assert abs(abs(s.amplitudes[0]) ** 2 - 1) < 1e-15


def test_ideal_stays_in_plane():
    n_q, tau = 5, 4
    s = new_uniform_state(n_q)
    N = 1 << n_q
    for _ in range(20):
        apply_ideal_grover(s, tau)
        a = s.amplitudes
        rest = np.delete(a[:N], tau)
        assert np.abs(rest - rest.mean()).max() < 1e-14
        assert np.abs(a[N:]).max() == 0


def test_gate_trajectory_tracks_matrix_with_ancilla_restored():
    n_q, tau = 7, 77
    c = build_grover_iteration(n_q, tau)
    a, b = new_uniform_state(n_q), new_uniform_state(n_q)
    for _ in range(20):
        apply_circuit(a, c)
        apply_ideal_grover(b, tau)
        assert abs(np.vdot(a.amplitudes, b.amplitudes)) >= 1 - 1e-10
        assert np.sum(np.abs(a.amplitudes[a.half:]) ** 2) < 1e-12


def test_format_circuit_lists_every_gate():
    c = build_grover_iteration(6, 2)
    lines = format_circuit(c).splitlines()
    assert lines[0].startswith("# grover iteration n_q=6")
    assert len(lines) == 1 + len(c.gates)
    assert lines[1] == "ORACLE 2 slots=0"
    assert sum(line.startswith("CCX ") for line in lines) == 16
