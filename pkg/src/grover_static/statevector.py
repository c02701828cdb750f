"""Dense statevector storage and elementary gate kernels.

Bit convention: qubit ``q`` (1-based) is bit ``q - 1`` of the basis index.
The ancilla is the highest qubit ``n_tot``, so basis states ``x`` and
``x + N`` differ only by the ancilla value. sigma^z has eigenvalue +1 on
bit value 0 and -1 on bit value 1.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import _kernels
from .exceptions import SizeError

MAX_QUBITS = 25


@dataclass(frozen=True)
class Hadamard:
    q: int

    @property
    def qubits(self):
        return (self.q,)


@dataclass(frozen=True)
class PauliX:
    q: int

    @property
    def qubits(self):
        return (self.q,)


@dataclass(frozen=True)
class ControlledNot:
    c: int
    t: int

    @property
    def qubits(self):
        return (self.c, self.t)


@dataclass(frozen=True)
class Toffoli:
    c1: int
    c2: int
    t: int

    @property
    def qubits(self):
        return (self.c1, self.c2, self.t)


@dataclass(frozen=True)
class MultiControlledX:
    """NOT on ``t`` iff every qubit in ``controls`` is 1 (used only below 7 qubits)."""

    controls: Tuple[int, ...]
    t: int

    @property
    def qubits(self):
        return tuple(self.controls) + (self.t,)


@dataclass(frozen=True)
class OraclePhase:
    """Diagonal sign flip of basis states ``x`` with ``x mod N == tau``."""

    tau: int

    @property
    def qubits(self):
        return ()


GateOp = Union[Hadamard, PauliX, ControlledNot, Toffoli, MultiControlledX, OraclePhase]


class QuantumState:
    """Complex amplitude vector over ``2**n_tot`` basis states."""

    def __init__(self, amplitudes, n_tot=None):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        dim = amplitudes.shape[0]
        if amplitudes.ndim != 1 or dim < 2 or dim & (dim - 1):
            raise SizeError(f"amplitude vector length {dim} is not a power of two >= 2")
        inferred = dim.bit_length() - 1
        if n_tot is not None and n_tot != inferred:
            raise SizeError(f"n_tot={n_tot} does not match vector length {dim}")
        self.amplitudes = amplitudes
        self.n_tot = inferred

    @property
    def n_q(self):
        return self.n_tot - 1

    @property
    def half(self):
        """N = 2**n_q, the size of one ancilla block."""
        return self.amplitudes.shape[0] // 2

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def copy(self):
        return QuantumState(self.amplitudes.copy(), self.n_tot)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"QuantumState(n_tot={self.n_tot}, norm={self.norm():.15g})"


def new_uniform_state(n_q):
    """Uniform superposition over the ancilla-0 block, ancilla block 1 empty."""
    if not 1 <= n_q <= 24:
        raise SizeError(f"n_q={n_q} outside [1, 24]")
    n_half = 1 << n_q
    amps = np.zeros(2 * n_half, dtype=np.complex128)
    amps[:n_half] = 1.0 / np.sqrt(n_half)
    return QuantumState(amps, n_q + 1)


def basis_state(n_tot, index):
    if not 1 <= n_tot <= MAX_QUBITS:
        raise SizeError(f"n_tot={n_tot} outside [1, {MAX_QUBITS}]")
    amps = np.zeros(1 << n_tot, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(amps, n_tot)


def random_state(n_tot, rng):
    amps = rng.normal(size=1 << n_tot) + 1j * rng.normal(size=1 << n_tot)
    return QuantumState(amps / np.linalg.norm(amps), n_tot)


def _check_qubits(qubits, n_tot):
    for q in qubits:
        if not 1 <= q <= n_tot:
            raise IndexError(f"qubit {q} outside [1, {n_tot}]")
    if len(set(qubits)) != len(qubits):
        raise IndexError(f"repeated qubit in {qubits}")


def gate_code(g, n_tot):
    """(kind, target_bit, control_mask) triple understood by the compiled kernels."""
    _check_qubits(g.qubits, n_tot)
    if isinstance(g, Hadamard):
        return _kernels.GATE_HADAMARD, 1 << (g.q - 1), 0
    if isinstance(g, PauliX):
        return _kernels.GATE_CX, 1 << (g.q - 1), 0
    if isinstance(g, ControlledNot):
        return _kernels.GATE_CX, 1 << (g.t - 1), 1 << (g.c - 1)
    if isinstance(g, Toffoli):
        return _kernels.GATE_CX, 1 << (g.t - 1), (1 << (g.c1 - 1)) | (1 << (g.c2 - 1))
    if isinstance(g, MultiControlledX):
        mask = 0
        for c in g.controls:
            mask |= 1 << (c - 1)
        return _kernels.GATE_CX, 1 << (g.t - 1), mask
    if isinstance(g, OraclePhase):
        if not 0 <= g.tau < (1 << (n_tot - 1)):
            raise IndexError(f"oracle index {g.tau} outside [0, {1 << (n_tot - 1)})")
        return _kernels.GATE_ORACLE, 0, 0
    raise TypeError(f"unknown gate {g!r}")


def apply_gate(state, g):
    kind, tbit, cmask = gate_code(g, state.n_tot)
    tau = g.tau if isinstance(g, OraclePhase) else 0
    _kernels.apply_gate_code(state.amplitudes, kind, tbit, cmask, tau, state.half)


def apply_xx_rotation(state, i, j, theta):
    """Multiply by exp(-i theta X_i X_j)."""
    if i == j:
        raise IndexError("XX rotation needs two distinct qubits")
    _check_qubits((i, j), state.n_tot)
    lo, hi = sorted((1 << (i - 1), 1 << (j - 1)))
    _kernels.xx_rotation(state.amplitudes, lo, hi, np.cos(theta), np.sin(theta))


def z_signs(n_tot, qubit):
    """sigma^z eigenvalue of ``qubit`` for every basis index, as float64."""
    x = np.arange(1 << n_tot, dtype=np.int64)
    return 1.0 - 2.0 * ((x >> (qubit - 1)) & 1)


def z_energy(n_tot, coefficients):
    """Diagonal of sum_i c_i sigma^z_i over the computational basis."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (n_tot,):
        raise SizeError(f"expected {n_tot} coefficients, got shape {coefficients.shape}")
    energy = np.zeros(1 << n_tot)
    for q, c in enumerate(coefficients, start=1):
        if c != 0.0:
            energy += c * z_signs(n_tot, q)
    return energy


def apply_z_phase(state, angles):
    """Multiply amplitude x by exp(-i sum_q s_q(x) angles_q)."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (state.n_tot,):
        raise SizeError(f"need {state.n_tot} angles, got shape {angles.shape}")
    _kernels.mul_diag(state.amplitudes, np.exp(-1j * z_energy(state.n_tot, angles)))


def inner_product(psi, phi):
    """<psi|phi>, conjugate-linear in the first argument."""
    if psi.dim != phi.dim:
        raise SizeError(f"dimension mismatch {psi.dim} vs {phi.dim}")
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))
