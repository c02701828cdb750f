"""Gate-level Grover iteration and the exact ideal reference.

One iteration is the oracle followed by the diffusion operator D = W R W,
where W is a Hadamard wall on the n_q search qubits and R (a reflection about
|0...0>) is built from NOT gates, two Hadamards on qubit n_q and a generalized
Toffoli. The generalized Toffoli uses the ancilla (qubit n_tot) as its single
borrowed auxiliary, so it works whatever state the ancilla is in.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from . import _kernels
from .exceptions import DomainError, SizeError
from .statevector import (
    ControlledNot,
    Hadamard,
    MultiControlledX,
    OraclePhase,
    PauliX,
    Toffoli,
    gate_code,
)

# Smallest register (controls + target + auxiliary) for the 8 * (n - 5) Toffoli network.
MIN_NETWORK_QUBITS = 7


def grover_frequency(n_q):
    """Rotation angle per ideal iteration, 2 * arcsin(sqrt(1 / 2**n_q))."""
    if n_q < 1:
        raise DomainError(f"n_q={n_q} must be >= 1")
    return 2.0 * np.arcsin(2.0 ** (-0.5 * n_q))


def grover_period(n_q):
    return np.pi / (2.0 * grover_frequency(n_q))


def _borrowed_ancilla_mcx(controls, target, borrowed):
    """NOT on target iff all controls are 1, using len(controls) - 2 borrowed qubits.

    4 * (m - 2) Toffolis for m >= 3 controls; the borrowed qubits may hold any
    state and are returned to it.
    """
    m = len(controls)
    x = list(controls)
    a = list(borrowed[: m - 2])
    if len(a) < m - 2:
        raise ValueError(f"need {m - 2} borrowed qubits, have {len(a)}")
    down = [Toffoli(x[m - 1], a[m - 3], target)]
    down += [Toffoli(x[k], a[k - 2], a[k - 1]) for k in range(m - 2, 1, -1)]
    center = Toffoli(x[0], x[1], a[0])
    first = down + [center] + down[::-1]
    second = down[1:] + [center] + down[1:][::-1]
    return first + second


def build_generalized_toffoli(controls, target, auxiliary):
    """Multi-controlled NOT decomposed into three-qubit Toffolis with one auxiliary.

    For ``len(controls) + 2 >= 7`` the result has exactly
    ``8 * (len(controls) + 2 - 5)`` Toffolis. Smaller cases return a single gate
    (NOT, CNOT, Toffoli or MultiControlledX) that leaves ``auxiliary`` alone.
    """
    controls = list(controls)
    wires = controls + [target, auxiliary]
    if len(set(wires)) != len(wires):
        raise IndexError(f"qubit indices must be distinct: {wires}")
    n = len(wires)
    if n < MIN_NETWORK_QUBITS:
        if not controls:
            return [PauliX(target)]
        if len(controls) == 1:
            return [ControlledNot(controls[0], target)]
        if len(controls) == 2:
            return [Toffoli(controls[0], controls[1], target)]
        return [MultiControlledX(tuple(controls), target)]
    m1 = (n - 1) // 2
    group1 = controls[:m1]
    group2 = controls[m1:]
    to_aux = _borrowed_ancilla_mcx(group1, auxiliary, group2 + [target])
    to_target = _borrowed_ancilla_mcx(group2 + [auxiliary], target, group1)
    return to_aux + to_target + to_aux + to_target


@dataclass(frozen=True)
class GroverCircuit:
    n_q: int
    tau: int
    gates: Tuple = field(repr=False)
    # imperfection slots charged to the oracle; the gate count law holds for 0
    oracle_slots: int = 0

    @property
    def n_tot(self):
        return self.n_q + 1

    @property
    def n_g(self):
        return count_gate_slots(self)

    def slots_of(self, g):
        return self.oracle_slots if isinstance(g, OraclePhase) else 1

    @cached_property
    def codes(self):
        """Arrays (kinds, target_bits, control_masks, slots) for the compiled kernels."""
        rows = [gate_code(g, self.n_tot) for g in self.gates]
        kinds = np.array([r[0] for r in rows], dtype=np.int64)
        tbits = np.array([r[1] for r in rows], dtype=np.int64)
        cmasks = np.array([r[2] for r in rows], dtype=np.int64)
        slots = np.array([self.slots_of(g) for g in self.gates], dtype=np.int64)
        return kinds, tbits, cmasks, slots


def build_grover_iteration(n_q, tau, oracle_slots=0):
    n_half = 1 << n_q
    if not 0 <= tau < n_half:
        raise DomainError(f"tau={tau} outside [0, {n_half})")
    n_tot = n_q + 1
    search = list(range(1, n_q + 1))
    walls = [Hadamard(q) for q in search]
    nots = [PauliX(q) for q in search]
    mcx = build_generalized_toffoli(search[:-1], n_q, n_tot)
    reflection = nots + [Hadamard(n_q)] + mcx + [Hadamard(n_q)] + nots
    gates = [OraclePhase(tau)] + walls + reflection + walls
    return GroverCircuit(n_q, tau, tuple(gates), oracle_slots)


def count_gate_slots(circuit):
    return sum(circuit.slots_of(g) for g in circuit.gates)


def apply_circuit(state, circuit):
    """One imperfection-free pass of the gate list."""
    if state.n_tot != circuit.n_tot:
        raise SizeError(f"state has {state.n_tot} qubits, circuit {circuit.n_tot}")
    kinds, tbits, cmasks, _ = circuit.codes
    _kernels.gate_sequence(state.amplitudes, kinds, tbits, cmasks, circuit.tau, state.half)


def apply_ideal_grover(state, tau):
    """G = D O from the matrix definitions, O(M) per call.

    Acts identically on both ancilla blocks; D_ii = -1 + 2/N, D_ij = 2/N.
    The gate-built iteration equals -G.
    """
    v = state.amplitudes.reshape(2, state.half)
    v[:, tau] = -v[:, tau]
    mean = v.mean(axis=1, keepdims=True)
    v *= -1.0
    v += 2.0 * mean


def format_circuit(circuit):
    """Plain-text listing, one gate per line: name then 1-based qubit indices."""
    names = {
        Hadamard: "H",
        PauliX: "X",
        ControlledNot: "CX",
        Toffoli: "CCX",
        MultiControlledX: "MCX",
    }
    lines = [f"# grover iteration n_q={circuit.n_q} tau={circuit.tau} n_g={circuit.n_g}"]
    for g in circuit.gates:
        if isinstance(g, OraclePhase):
            lines.append(f"ORACLE {g.tau} slots={circuit.oracle_slots}")
        else:
            lines.append(" ".join([names[type(g)]] + [str(q) for q in g.qubits]))
    return "\n".join(lines) + "\n"
