"""Static disorder on a periodic qubit lattice and its inter-gate propagator.

H_S = sum_i a_i sigma^z_i + sum_<ij> b_ij sigma^x_i sigma^x_j with a_i, b_ij
uniform in [-alpha, alpha] and [-beta, beta]. Draws come from numpy's Philox
counter-based generator keyed by the realization seed, as unit-interval shapes
scaled by the strengths, so one seed gives the same disorder shape at every
strength.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
from numba import njit
from scipy.special import jv

from . import _kernels
from .exceptions import CapacityError, SizeError

# Largest per-substep phase budget duration * eps * n_tot / k for the split propagator.
SPLIT_PHASE_STEP = 0.001
DENSE_MAX_QUBITS = 8
RNG_ALGORITHM = "numpy Philox4x64-10, key = realization seed"


@dataclass(frozen=True)
class QubitLattice:
    """L_x by L_y torus; site (x, y) has 1-based index x + L_x * (y - 1)."""

    L_x: int
    L_y: int
    edges: Tuple[Tuple[int, int], ...]

    @property
    def n_tot(self):
        return self.L_x * self.L_y

    def index(self, x, y):
        return x + self.L_x * (y - 1)

    def edges_touching(self, site):
        return [e for e in self.edges if site in e]


def build_lattice(L_x, L_y):
    """Periodic nearest-neighbour lattice. Wrap edges that coincide with an
    interior edge (a side of length 2) are merged; sides of length 1 give none."""
    if L_x < 1 or L_y < 1:
        raise SizeError(f"lattice sides must be >= 1, got {L_x}x{L_y}")
    edges = set()
    for y in range(1, L_y + 1):
        for x in range(1, L_x + 1):
            here = x + L_x * (y - 1)
            right = (x % L_x) + 1 + L_x * (y - 1)
            up = x + L_x * (y % L_y)
            for other in (right, up):
                if other != here:
                    edges.add((min(here, other), max(here, other)))
    return QubitLattice(L_x, L_y, tuple(sorted(edges)))


def lattice_for(n_tot):
    """Most nearly square L_x <= L_y factorization with L_x >= 2 when possible."""
    best = (1, n_tot)
    for lx in range(1, int(math.isqrt(n_tot)) + 1):
        if n_tot % lx == 0:
            best = (lx, n_tot // lx)
    return build_lattice(*best)


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    lattice: QubitLattice
    a: np.ndarray
    b: np.ndarray
    alpha: float
    beta: float
    seed: int

    @property
    def epsilon(self):
        return max(self.alpha, self.beta)

    @property
    def n_tot(self):
        return self.lattice.n_tot

    def coupling(self, i, j):
        """b for the edge {i, j}, 0 if the sites are not neighbours."""
        key = (min(i, j), max(i, j))
        try:
            return float(self.b[self.lattice.edges.index(key)])
        except ValueError:
            return 0.0

    def scaled(self, factor):
        return DisorderRealization(self.lattice, self.a * factor, self.b * factor,
                                   self.alpha * factor, self.beta * factor, self.seed)


def realization_seed(master_seed, k):
    return int(master_seed) ^ int(k)


def sample_disorder(lattice, epsilon, seed, alpha=None, beta=None):
    """Uniform shifts in [-alpha, alpha], couplings in [-beta, beta]; alpha = beta = epsilon by default."""
    alpha = epsilon if alpha is None else alpha
    beta = epsilon if beta is None else beta
    if alpha < 0 or beta < 0:
        raise ValueError("disorder strengths must be non-negative")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    unit_a = rng.uniform(-1.0, 1.0, lattice.n_tot)
    unit_b = rng.uniform(-1.0, 1.0, len(lattice.edges))
    return DisorderRealization(lattice, alpha * unit_a, beta * unit_b,
                               float(alpha), float(beta), int(seed))


def xx_energy(n_tot, edges, b):
    """Eigenvalues of sum_e b_e X_i X_j indexed by Walsh-Hadamard basis state."""
    y = np.arange(1 << n_tot, dtype=np.int64)
    energy = np.zeros(1 << n_tot)
    for (i, j), coupling in zip(edges, b):
        parity = ((y >> (i - 1)) ^ (y >> (j - 1))) & 1
        energy += coupling * (1.0 - 2.0 * parity)
    return energy


def z_energy(n_tot, a):
    y = np.arange(1 << n_tot, dtype=np.int64)
    energy = np.zeros(1 << n_tot)
    for q, shift in enumerate(a, start=1):
        energy += shift * (1.0 - 2.0 * ((y >> (q - 1)) & 1))
    return energy


def default_substeps(duration, epsilon, n_tot):
    return max(1, math.ceil(duration * epsilon * n_tot / SPLIT_PHASE_STEP - 1e-12))


@njit(cache=True)
def _chebyshev(psi, coeffs, z_energy, x_energy, scale, shift):
    """sum_k coeffs[k] T_k((H - shift) / scale) psi, written back into psi."""
    M = psi.shape[0]
    work = np.empty(M, dtype=np.complex128)
    t_prev = psi.copy()
    t_cur = np.empty(M, dtype=np.complex128)
    _kernels.apply_hamiltonian(t_prev, t_cur, z_energy, x_energy, work)
    for x in range(M):
        t_cur[x] = (t_cur[x] - shift * t_prev[x]) / scale
    acc = coeffs[0] * t_prev + coeffs[1] * t_cur
    t_next = np.empty(M, dtype=np.complex128)
    for k in range(2, coeffs.shape[0]):
        _kernels.apply_hamiltonian(t_cur, t_next, z_energy, x_energy, work)
        ck = coeffs[k]
        for x in range(M):
            v = 2.0 * (t_next[x] - shift * t_cur[x]) / scale - t_prev[x]
            t_prev[x] = t_cur[x]
            t_cur[x] = v
            acc[x] += ck * v
    for x in range(M):
        psi[x] = acc[x]


class StaticNoise:
    """A realization prepared for fast propagation on 2**n_tot amplitudes."""

    def __init__(self, realization):
        self.realization = realization
        n_tot = realization.n_tot
        if n_tot > 24:
            raise CapacityError(f"n_tot={n_tot} exceeds the dense-state limit")
        self.n_tot = n_tot
        self.dim = 1 << n_tot
        self.z_energy = z_energy(n_tot, realization.a)
        self.x_energy = xx_energy(n_tot, realization.lattice.edges, realization.b)
        self._split_cache = {}
        self._x_scaled = None

    def split_factors(self, duration, substeps):
        key = (float(duration), int(substeps))
        if key not in self._split_cache:
            dt = duration / substeps
            z_half = np.exp(-0.5j * dt * self.z_energy)
            z_full = z_half * z_half
            x_diag = np.exp(-1j * dt * self.x_energy) / self.dim
            self._split_cache[key] = (z_half, z_full, x_diag)
        return self._split_cache[key]

    def split(self, psi, duration=1.0, substeps=None):
        if substeps is None:
            substeps = default_substeps(duration, self.realization.epsilon, self.n_tot)
        z_half, z_full, x_diag = self.split_factors(duration, substeps)
        _kernels.split_propagator(psi, z_half, z_full, x_diag, substeps)

    def chebyshev_coefficients(self, duration, tol=1e-15):
        key = ("cheb", float(duration), float(tol))
        if key not in self._split_cache:
            bound = float(np.abs(self.realization.a).sum() + np.abs(self.realization.b).sum())
            scale = bound * 1.01
            z = scale * duration
            n_terms = int(z + 20 + 3 * z ** (1.0 / 3.0))
            while abs(jv(n_terms, z)) > tol:
                n_terms += 5
            k = np.arange(n_terms + 1)
            coeffs = 2.0 * (-1j) ** k * jv(k, z)
            coeffs[0] /= 2.0
            self._split_cache[key] = (coeffs.astype(np.complex128), scale)
        return self._split_cache[key]

    def exact(self, psi, duration=1.0, tol=1e-15):
        """Chebyshev expansion of exp(-i H_S duration), accurate to roughly ``tol``."""
        if duration == 0.0 or not (np.any(self.realization.a) or np.any(self.realization.b)):
            return
        coeffs, scale = self.chebyshev_coefficients(duration, tol)
        if self._x_scaled is None:
            self._x_scaled = self.x_energy / self.dim
        _chebyshev(psi, coeffs, self.z_energy, self._x_scaled, scale, 0.0)


def apply_noise_propagator(state, realization, duration=1.0, substeps=None):
    """Symmetric split approximation of exp(-i H_S duration), applied in place.

    Default sub-stepping keeps duration * eps * n_tot / k <= SPLIT_PHASE_STEP.
    """
    if state.n_tot != realization.n_tot:
        raise SizeError(f"state has {state.n_tot} qubits, realization {realization.n_tot}")
    StaticNoise(realization).split(state.amplitudes, duration, substeps)


def dense_hamiltonian(realization):
    n_tot = realization.n_tot
    if n_tot > DENSE_MAX_QUBITS:
        raise CapacityError(f"dense oracle limited to {DENSE_MAX_QUBITS} qubits, got {n_tot}")
    dim = 1 << n_tot
    h = np.diag(z_energy(n_tot, realization.a)).astype(np.complex128)
    x = np.arange(dim)
    for (i, j), coupling in zip(realization.lattice.edges, realization.b):
        h[x ^ ((1 << (i - 1)) | (1 << (j - 1))), x] += coupling
    return h


def dense_expm_oracle(realization, duration=1.0):
    """exp(-i H_S duration) by Hermitian eigendecomposition (n_tot <= 8)."""
    h = dense_hamiltonian(realization)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * duration * w)) @ v.conj().T


def dump_realization(realization, path=None):
    """Plain-text record with 17 significant digits; written to ``path`` if given."""
    lat = realization.lattice
    lines = [
        "# grover_static disorder realization",
        f"# rng {RNG_ALGORITHM}",
        f"lattice {lat.L_x} {lat.L_y}",
        f"alpha {realization.alpha:.17g}",
        f"beta {realization.beta:.17g}",
        f"seed {realization.seed}",
    ]
    lines += [f"a {q} {v:.17g}" for q, v in enumerate(realization.a, start=1)]
    lines += [f"b {i} {j} {v:.17g}" for (i, j), v in zip(lat.edges, realization.b)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_realization(source):
    """Inverse of :func:`dump_realization`; accepts a path or the text itself."""
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else source
    fields = {}
    a, b = {}, {}
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "a":
            a[int(parts[1])] = float(parts[2])
        elif parts[0] == "b":
            b[(int(parts[1]), int(parts[2]))] = float(parts[3])
        else:
            fields[parts[0]] = parts[1:]
    lattice = build_lattice(int(fields["lattice"][0]), int(fields["lattice"][1]))
    if sorted(b) != list(lattice.edges) or sorted(a) != list(range(1, lattice.n_tot + 1)):
        raise SizeError("realization record does not match its lattice")
    return DisorderRealization(
        lattice,
        np.array([a[q] for q in range(1, lattice.n_tot + 1)]),
        np.array([b[e] for e in lattice.edges]),
        float(fields["alpha"][0]),
        float(fields["beta"][0]),
        int(fields["seed"][0]),
    )
