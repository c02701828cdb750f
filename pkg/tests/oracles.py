"""Independent dense reference constructions shared by the tests.

Everything here is built from explicit Kronecker products or permutation
tables, without touching the package kernels.
"""

from functools import reduce

import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def single(op, q, n_tot):
    """op on qubit q (1-based, bit q-1) of n_tot qubits; qubit n_tot is the leftmost factor."""
    factors = [op if k == q else I2 for k in range(n_tot, 0, -1)]
    return reduce(np.kron, factors)


def pair(op_a, qa, op_b, qb, n_tot):
    factors = []
    for k in range(n_tot, 0, -1):
        factors.append(op_a if k == qa else op_b if k == qb else I2)
    return reduce(np.kron, factors)


def controlled_x_matrix(controls, target, n_tot):
    dim = 1 << n_tot
    mask = sum(1 << (c - 1) for c in controls)
    perm = np.zeros((dim, dim))
    for x in range(dim):
        y = x ^ (1 << (target - 1)) if (x & mask) == mask else x
        perm[y, x] = 1.0
    return perm


def oracle_matrix(tau, n_tot):
    n_half = 1 << (n_tot - 1)
    d = np.ones(2 * n_half)
    d[tau] = d[tau + n_half] = -1.0
    return np.diag(d)


def grover_matrix(n_q, tau):
    """G = D O on both ancilla blocks, with D_ii = -1 + 2/N and D_ij = 2/N."""
    N = 1 << n_q
    D = np.full((N, N), 2.0 / N) - np.eye(N)
    O = np.eye(N)
    O[tau, tau] = -1.0
    return np.kron(np.eye(2), D @ O)


def dense_h_s(realization):
    n = realization.n_tot
    h = sum(a * single(Z, q, n) for q, a in enumerate(realization.a, start=1))
    for (i, j), b in zip(realization.lattice.edges, realization.b):
        h = h + b * pair(X, i, X, j, n)
    return h


def expm_hermitian(h, t):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def random_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def four_state_vectors(n_q, tau):
    """Rows |tau_0>, |tau_1>, |eta_0>, |eta_1> written out element by element."""
    N = 1 << n_q
    V = np.zeros((4, 2 * N))
    V[0, tau] = 1.0
    V[1, tau + N] = 1.0
    for x in range(N):
        if x != tau:
            V[2, x] = V[3, x + N] = 1.0 / np.sqrt(N - 1)
    return V


def gaussian_convolution(sigma, om):
    """Two-level average 2 om^2 / (x^2 + 4 om^2) against N(0, sigma^2) by quadrature in u = x / sigma."""
    from scipy.integrate import quad

    f = lambda u: 2 * om ** 2 / ((sigma * u) ** 2 + 4 * om ** 2) * np.exp(-u * u / 2)
    return 2 * quad(f, 0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=1000)[0] / np.sqrt(2 * np.pi)
