"""Analytic layer: chaos border, single-kick model, the 4x4 effective
Hamiltonian, its 2x2 reduction and the Gaussian-averaged search probability.

Order-of-magnitude quantities (decay rate, measurement and operation counts)
carry unit constants and are labelled as estimates.
"""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfcx

from .circuit import apply_ideal_grover, build_grover_iteration, grover_frequency
from .exceptions import DomainError, FitError, SizeError
from .imperfections import StaticNoise
from .observables import TimeSeries, fidelity, w_4, w_g
from .statevector import new_uniform_state, z_signs

DEFAULT_R = 0.56
EPS_C_FACTOR = 1.7


def default_gate_slots(n_tot):
    """Slots per iteration of the default circuit (12 n_tot - 42 from 7 qubits up)."""
    return build_grover_iteration(n_tot - 1, 0).n_g


def epsilon_critical(n_g, n_tot):
    """eps_c = 1.7 / (n_g sqrt(n_tot))."""
    if n_g < 1 or n_tot < 1:
        raise DomainError("n_g and n_tot must be >= 1")
    return EPS_C_FACTOR / (n_g * np.sqrt(n_tot))


def decay_rate_estimate(eps, n_g, n_tot):
    """Golden-rule estimate Gamma ~ eps^2 n_g^2 n_tot against a gap of order 1."""
    return eps ** 2 * n_g ** 2 * n_tot


def sigma_width(eps, R, n_g, n_q, alpha=None, beta=None):
    """Width of the A - B distribution, R n_g sqrt(n_q / 3) sqrt(alpha^2 + 2 beta^2).

    With alpha = beta = eps (the default) this is eps R n_g sqrt(n_q).
    """
    alpha = eps if alpha is None else alpha
    beta = eps if beta is None else beta
    if np.any(np.asarray(alpha) < 0) or np.any(np.asarray(beta) < 0) or min(R, n_g, n_q) < 0:
        raise DomainError("sigma_width arguments must be non-negative")
    return R * n_g * np.sqrt(n_q / 3.0) * np.sqrt(alpha ** 2 + 2.0 * beta ** 2)


@dataclass(frozen=True)
class TheoryParams:
    n_q: int
    n_g: int
    eps: float
    R: float = DEFAULT_R

    def __post_init__(self):
        if not 0 < self.R <= 1:
            raise DomainError(f"R={self.R} outside (0, 1]")

    @property
    def n_tot(self):
        return self.n_q + 1

    @property
    def omega_g(self):
        return grover_frequency(self.n_q)

    @property
    def eps_c(self):
        return epsilon_critical(self.n_g, self.n_tot)

    @property
    def sigma(self):
        return sigma_width(self.eps, self.R, self.n_g, self.n_q)


@dataclass
class EffectiveHamiltonian4:
    """Matrix in the basis (|tau_0>, |tau_1>, |eta_0>, |eta_1>)."""

    matrix: np.ndarray
    A: float
    B: float
    a: float
    b: float
    omega_g: float
    R: float
    n_g: int
    exact: bool = False
    meta: dict = field(default_factory=dict)


def _ancilla_split(realization):
    n_tot = realization.n_tot
    inner, touching = [], []
    for (i, j), coupling in zip(realization.lattice.edges, realization.b):
        (touching if n_tot in (i, j) else inner).append(((i, j), coupling))
    return inner, touching


def build_h_eff(realization, tau, R=DEFAULT_R, n_g=None, lattice=None, exact_projection=False):
    """Effective Hamiltonian of the imperfect iteration on the four-state subspace.

    A = -R n_g sum_i a_i s_i(tau) over search qubits, with s = +1 for bit 0.
    a = -R n_g a_anc for the ancilla (qubit n_tot).
    B = R n_g times the sum of couplings between search qubits.
    b = R n_g times the sum of couplings on the edges touching the ancilla.
    The diagonal is (A + a, A - a, B, B); the Grover rotation enters as
    -i omega_G between |tau_s> and |eta_s>, and b couples |eta_0> and |eta_1>.
    The z terms enter with a minus sign: in the frame of the gate sequence the
    couplings weigh on |tau> rather than on |eta>, so A - B tracks the
    oscillation frequency of the gate-level run.

    With ``exact_projection`` the matrix is instead the exact projection of
    the single-kick generator +R n_g H_S onto the subspace plus the same
    rotation block.
    """
    if lattice is not None and lattice != realization.lattice:
        raise SizeError("lattice does not match the realization")
    n_tot = realization.n_tot
    n_q = n_tot - 1
    n_half = 1 << n_q
    if not 0 <= tau < n_half:
        raise DomainError(f"tau={tau} outside [0, {n_half})")
    if n_g is None:
        n_g = default_gate_slots(n_tot)
    k = R * n_g
    s_tau = np.array([1.0 - 2.0 * ((tau >> (q - 1)) & 1) for q in range(1, n_q + 1)])
    z_tau = float(np.dot(realization.a[:n_q], s_tau))
    inner, touching = _ancilla_split(realization)
    sum_inner = sum(c for _, c in inner)
    sum_touch = sum(c for _, c in touching)
    A = -k * z_tau
    a = -k * float(realization.a[n_q])
    B = k * sum_inner
    b = k * sum_touch
    om = grover_frequency(n_q)

    h = np.zeros((4, 4), dtype=np.complex128)
    if not exact_projection:
        h[0, 0], h[1, 1], h[2, 2], h[3, 3] = A + a, A - a, B, B
        h[2, 3] = h[3, 2] = b
    else:
        r = (n_half - 2) / (n_half - 1)
        c = 1.0 / np.sqrt(n_half - 1)
        eta_z = -z_tau / (n_half - 1)
        a_kick = k * float(realization.a[n_q])
        h[0, 0], h[1, 1] = k * z_tau + a_kick, k * z_tau - a_kick
        h[2, 2] = k * (eta_z + sum_inner * r) + a_kick
        h[3, 3] = k * (eta_z + sum_inner * r) - a_kick
        h[2, 3] = h[3, 2] = b * r
        h[0, 2] = h[2, 0] = h[1, 3] = h[3, 1] = k * sum_inner * c
        h[0, 3] = h[3, 0] = h[1, 2] = h[2, 1] = b * c
    h[0, 2] += -1j * om
    h[1, 3] += -1j * om
    h[2, 0] += 1j * om
    h[3, 1] += 1j * om
    return EffectiveHamiltonian4(h, A, B, a, b, om, R, n_g, exact_projection,
                                 {"tau": tau, "seed": realization.seed})


def evolve_h_eff(h, times, psi0=None):
    """Exact 4-component states exp(-i H t) psi0 for each t; default psi0 is |psi_0>."""
    mat = h.matrix if isinstance(h, EffectiveHamiltonian4) else np.asarray(h)
    if psi0 is None:
        om = h.omega_g if isinstance(h, EffectiveHamiltonian4) else 0.0
        psi0 = np.array([np.sin(om / 2), 0.0, np.cos(om / 2), 0.0], dtype=complex)
    w, v = np.linalg.eigh(mat)
    coef = v.conj().T @ psi0
    times = np.asarray(times, dtype=float)
    return (v[None, :, :] * (np.exp(-1j * np.outer(times, w)) * coef[None, :])[:, None, :]).sum(axis=2)


def two_level_w_g(A, B, omega_g):
    """Time-averaged searched-state probability 2 w^2 / ((A - B)^2 + 4 w^2)."""
    if omega_g <= 0:
        raise DomainError("omega_g must be > 0")
    return 2.0 * omega_g ** 2 / ((A - B) ** 2 + 4.0 * omega_g ** 2)


def mean_w_g_theory(sigma, omega_g):
    """two_level_w_g averaged over a Gaussian A - B of width sigma.

    sqrt(pi/2) erfc(z) exp(z^2) omega_G / sigma with z = sqrt(2) omega_G / sigma,
    evaluated through the scaled function erfcx; sigma = 0 gives 1/2.
    """
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0) or omega_g <= 0:
        raise DomainError("need sigma >= 0 and omega_g > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = omega_g / sigma
        out = np.sqrt(np.pi / 2.0) * erfcx(np.sqrt(2.0) * ratio) * ratio
    out = np.where(sigma == 0, 0.5, out)
    # erfcx(z) z -> 1/sqrt(pi) (1 - 1/(2 z^2)) is exact to double precision far out
    return float(out) if out.ndim == 0 else out


def renormalized_frequency(h):
    """|A - B| and the positive eigenvalue gaps of the 4x4 matrix."""
    w = np.linalg.eigvalsh(h.matrix)
    gaps = sorted({round(float(abs(x - y)), 15) for i, x in enumerate(w) for y in w[i + 1:]})
    return abs(h.A - h.B), np.array(gaps)


def operations_budget(sigma, omega_g, eps, eps_c):
    """Order-of-magnitude estimates with unit constants.

    N_M ~ sigma^2 / omega_G^2 measurements, N_op ~ sigma / omega_G^2 operations
    and a parametric gain eps_c / eps.
    """
    if min(sigma, omega_g, eps, eps_c) <= 0:
        raise DomainError("operations_budget arguments must be positive")
    return {
        "N_M_estimate": sigma ** 2 / omega_g ** 2,
        "N_op_estimate": sigma / omega_g ** 2,
        "gain_estimate": eps_c / eps,
    }


def single_kick_run(n_q, tau, realization, R=DEFAULT_R, T_f=None, n_g=None,
                    keep_history=False, noise=None):
    """Ideal Grover step followed by exp(-i H_S n_g R) each iteration.

    The kick is applied through the Chebyshev propagator. Records w_G, w_4 and
    the fidelity against the ideal run at t = 0..T_f.
    """
    if not 0 < R <= 1:
        raise DomainError(f"R={R} outside (0, 1]")
    if realization.n_tot != n_q + 1:
        raise SizeError(f"realization has {realization.n_tot} qubits, need {n_q + 1}")
    if n_g is None:
        n_g = default_gate_slots(n_q + 1)
    if T_f is None:
        T_f = int(round(5 * np.pi / (2 * grover_frequency(n_q))))
    noise = noise or StaticNoise(realization)
    psi = new_uniform_state(n_q)
    ideal = psi.copy()
    n = T_f + 1
    wg, w4, f = np.empty(n), np.empty(n), np.empty(n)
    hist = np.empty((n, psi.dim), dtype=np.complex128) if keep_history else None
    duration = n_g * R
    for t in range(n):
        if t > 0:
            apply_ideal_grover(psi, tau)
            noise.exact(psi.amplitudes, duration, tol=1e-13)
            apply_ideal_grover(ideal, tau)
        wg[t] = w_g(psi, tau)
        w4[t] = w_4(psi, tau)
        f[t] = fidelity(psi, ideal)
        if keep_history:
            hist[t] = psi.amplitudes
    meta = {"model": "single_kick", "R": R, "n_g": n_g, "tau": tau,
            "eps": realization.epsilon, "seed": realization.seed}
    return TimeSeries(wg, w4, f, hist, meta)


@dataclass
class KickFit:
    R: float
    ci_low: float
    ci_high: float
    residual: float
    n_boot: int


def _fit_r(eps, w_full, omega_g, n_g, n_q, bounds):
    eps = np.asarray(eps, dtype=float)
    w_full = np.asarray(w_full, dtype=float)

    def loss(R):
        return float(np.sum((w_full - mean_w_g_theory(sigma_width(eps, R, n_g, n_q), omega_g)) ** 2))

    res = minimize_scalar(loss, bounds=bounds, method="bounded", options={"xatol": 1e-8})
    return float(res.x), float(res.fun)


def fit_kick_factor(eps, w_full, n_q, n_g=None, per_realization=None,
                    n_boot=200, seed=0, bounds=(1e-3, 1.0), level=0.95):
    """Least-squares R such that mean_w_g_theory(sigma(eps, R)) matches w_full.

    ``per_realization`` (one array of time-averaged w_G per eps) enables a
    bootstrap over realizations. Without it the grid points are resampled.
    """
    eps = np.asarray(eps, dtype=float)
    w_full = np.asarray(w_full, dtype=float)
    if len(eps) < 4 or len(eps) != len(w_full):
        raise FitError("need at least 4 matching (eps, w) points")
    n_g = default_gate_slots(n_q + 1) if n_g is None else n_g
    om = grover_frequency(n_q)
    R_hat, resid = _fit_r(eps, w_full, om, n_g, n_q, bounds)
    rng = np.random.Generator(np.random.Philox(key=seed))
    boots = []
    for _ in range(n_boot):
        if per_realization is not None:
            w_b = [np.mean(rng.choice(np.asarray(v), size=len(v))) for v in per_realization]
            boots.append(_fit_r(eps, w_b, om, n_g, n_q, bounds)[0])
        else:
            idx = rng.integers(0, len(eps), len(eps))
            if len(np.unique(idx)) < 2:
                continue
            boots.append(_fit_r(eps[idx], w_full[idx], om, n_g, n_q, bounds)[0])
    if boots:
        lo, hi = np.quantile(boots, [(1 - level) / 2, (1 + level) / 2])
    else:
        lo = hi = R_hat
    return KickFit(R_hat, float(lo), float(hi), resid, len(boots))


def theory_curve(eps_grid, n_tot, R=DEFAULT_R, n_g=None):
    """Rows (eps, sigma, mean w_G, eps / eps_c)."""
    n_q = n_tot - 1
    n_g = default_gate_slots(n_tot) if n_g is None else n_g
    eps_c = epsilon_critical(n_g, n_tot)
    om = grover_frequency(n_q)
    rows = []
    for eps in eps_grid:
        sigma = sigma_width(eps, R, n_g, n_q)
        rows.append((float(eps), float(sigma), float(mean_w_g_theory(sigma, om)), float(eps / eps_c)))
    return rows


def write_theory_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "sigma", "w_g_theory", "eps_over_eps_c"])
        for r in rows:
            w.writerow([repr(x) for x in r])
