import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grover_static.exceptions import SizeError
from grover_static.statevector import (
    ControlledNot,
    Hadamard,
    MultiControlledX,
    OraclePhase,
    PauliX,
    QuantumState,
    Toffoli,
    apply_gate,
    apply_xx_rotation,
    apply_z_phase,
    basis_state,
    inner_product,
    new_uniform_state,
)

from oracles import H, X, Z, controlled_x_matrix, oracle_matrix, pair, random_state, single


def _apply(amps, g):
    s = QuantumState(np.array(amps, dtype=complex))
    apply_gate(s, g)
    return s.amplitudes


def _kernel_matrix(g, n_tot):
    dim = 1 << n_tot
    return np.column_stack([_apply(np.eye(dim)[:, x], g) for x in range(dim)])


def test_uniform_state_small():
    assert np.allclose(new_uniform_state(1).amplitudes, [2 ** -0.5, 2 ** -0.5, 0, 0])
    assert np.allclose(new_uniform_state(2).amplitudes, [0.5] * 4 + [0] * 4)
    for n in range(1, 12):
        assert abs(new_uniform_state(n).norm() - 1.0) < 1e-15


@pytest.mark.parametrize("n_q", [0, 25, -1])
def test_uniform_state_range(n_q):
    with pytest.raises(SizeError):
        new_uniform_state(n_q)


def test_hadamard_on_zero():
    assert np.allclose(_apply([1, 0], Hadamard(1)), [2 ** -0.5, 2 ** -0.5])


def test_toffoli_truth_table():
    # controls q1, q2 set and target q3 clear
    s = basis_state(3, 0b011)
    apply_gate(s, Toffoli(1, 2, 3))
    assert np.argmax(np.abs(s.amplitudes)) == 0b111


def _gate_cases(n_tot):
    yield Hadamard(1), single(H, 1, n_tot)
    yield Hadamard(n_tot), single(H, n_tot, n_tot)
    yield PauliX(2), single(X, 2, n_tot)
    yield ControlledNot(1, n_tot), controlled_x_matrix([1], n_tot, n_tot)
    yield ControlledNot(n_tot, 1), controlled_x_matrix([n_tot], 1, n_tot)
    if n_tot >= 3:
        yield Toffoli(1, 3, 2), controlled_x_matrix([1, 3], 2, n_tot)
        yield MultiControlledX(tuple(range(2, n_tot + 1)), 1), \
            controlled_x_matrix(range(2, n_tot + 1), 1, n_tot)
    yield OraclePhase(1), oracle_matrix(1, n_tot)


@pytest.mark.parametrize("n_tot", [2, 3, 4])
def test_kernels_match_dense_matrices(n_tot):
    for g, mat in _gate_cases(n_tot):
        assert np.abs(_kernel_matrix(g, n_tot) - mat).max() < 1e-14, g


@pytest.mark.parametrize("n_tot", [2, 3, 4])
def test_xx_and_z_match_dense(n_tot):
    dim = 1 << n_tot
    theta = 0.37
    for i in range(1, n_tot + 1):
        for j in range(1, n_tot + 1):
            if i == j:
                continue
            ref = np.cos(theta) * np.eye(dim) - 1j * np.sin(theta) * pair(X, i, X, j, n_tot)
            cols = []
            for x in range(dim):
                s = basis_state(n_tot, x)
                apply_xx_rotation(s, i, j, theta)
                cols.append(s.amplitudes)
            assert np.abs(np.column_stack(cols) - ref).max() < 1e-14
    angles = np.linspace(0.1, 0.4, n_tot)
    hz = sum(a * single(Z, q, n_tot) for q, a in enumerate(angles, start=1))
    s = QuantumState(np.ones(dim) / np.sqrt(dim))
    apply_z_phase(s, angles)
    assert np.abs(s.amplitudes - np.diag(np.exp(-1j * np.diag(hz))) / np.sqrt(dim) @ np.ones(dim)).max() < 1e-14


def test_xx_examples():
    s = basis_state(2, 0)
    apply_xx_rotation(s, 1, 2, 0.0)
    assert np.allclose(s.amplitudes, [1, 0, 0, 0])
    apply_xx_rotation(s, 1, 2, np.pi / 2)
    assert np.allclose(s.amplitudes, [0, 0, 0, -1j])
    with pytest.raises(IndexError):
        apply_xx_rotation(s, 1, 1, 0.1)


def test_z_phase_single_qubit():
    for x, sign in ((0, -1), (1, +1)):
        s = basis_state(1, x)
        apply_z_phase(s, [0.3])
        assert np.isclose(s.amplitudes[x], np.exp(sign * 0.3j))
    with pytest.raises(SizeError):
        apply_z_phase(basis_state(2, 0), [0.1])


@pytest.mark.parametrize("bad", [Hadamard(0), PauliX(4), ControlledNot(1, 1), Toffoli(1, 2, 2),
                                 OraclePhase(4)])
def test_index_errors(bad):
    with pytest.raises(IndexError):
        apply_gate(basis_state(3, 0), bad)


def test_inner_product():
    psi = new_uniform_state(3)
    assert abs(inner_product(psi, psi) - 1) < 1e-15
    assert inner_product(basis_state(2, 0), basis_state(2, 1)) == 0
    assert np.isclose(inner_product(psi, basis_state(4, 5)), 1 / np.sqrt(8))
    with pytest.raises(SizeError):
        inner_product(psi, basis_state(3, 0))


gates5 = st.sampled_from([Hadamard(2), PauliX(5), ControlledNot(3, 1), Toffoli(5, 1, 4),
                          OraclePhase(7), MultiControlledX((1, 2, 3), 5)])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), gates5)
def test_unitarity_and_involution(seed, g):
    rng = np.random.default_rng(seed)
    v = random_state(32, rng)
    s = QuantumState(v.copy())
    apply_gate(s, g)
    assert abs(s.norm() - 1) < 1e-14
    apply_gate(s, g)
    assert np.abs(s.amplitudes - v).max() < 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3),
       st.sampled_from([(1, 2), (2, 5), (5, 3)]), st.sampled_from([(1, 4), (3, 4), (2, 3)]))
def test_xx_rotations_commute(seed, t1, t2, e1, e2):
    rng = np.random.default_rng(seed)
    v = random_state(32, rng)
    a, b = QuantumState(v.copy()), QuantumState(v.copy())
    apply_xx_rotation(a, *e1, t1)
    apply_xx_rotation(a, *e2, t2)
    apply_xx_rotation(b, *e2, t2)
    apply_xx_rotation(b, *e1, t1)
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-13
    assert abs(a.norm() - 1) < 1e-14
