"""Measured quantities: searched-state weight, four-state weight, fidelity,
Husimi phase-space density and the spectral density of a stored history.

The four-state subspace is spanned by |tau_0> = |tau>, |tau_1> = |tau + N>
and the uniform superpositions |eta_0>, |eta_1> over the remaining basis
states of each ancilla block.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DomainError, SizeError

HUSIMI_CELLS = 128


def _check_tau(state, tau):
    if not 0 <= tau < state.half:
        raise DomainError(f"tau={tau} outside [0, {state.half})")


def w_g(state, tau):
    """|psi_tau|^2 + |psi_{tau+N}|^2."""
    _check_tau(state, tau)
    amps = state.amplitudes
    return float(abs(amps[tau]) ** 2 + abs(amps[tau + state.half]) ** 2)


def _eta_overlaps(amps, tau, n_half):
    v = amps.reshape(2, n_half)
    rest = v.sum(axis=1) - v[:, tau]
    return rest / np.sqrt(n_half - 1) if n_half > 1 else np.zeros(2, dtype=complex)


def w_4(state, tau):
    """Probability inside span{|tau_0>, |tau_1>, |eta_0>, |eta_1>}.

    Computed as w_G plus the two eta weights, so w_G <= w_4 holds exactly.
    """
    _check_tau(state, tau)
    eta = _eta_overlaps(state.amplitudes, tau, state.half)
    return w_g(state, tau) + float(np.sum(np.abs(eta) ** 2))


def four_state_basis(n_tot, tau):
    """Rows are |tau_0>, |tau_1>, |eta_0>, |eta_1> as dense vectors."""
    n_half = 1 << (n_tot - 1)
    if not 0 <= tau < n_half:
        raise DomainError(f"tau={tau} outside [0, {n_half})")
    basis = np.zeros((4, 2 * n_half), dtype=np.complex128)
    basis[0, tau] = 1.0
    basis[1, tau + n_half] = 1.0
    if n_half > 1:
        c = 1.0 / np.sqrt(n_half - 1)
        basis[2, :n_half] = c
        basis[2, tau] = 0.0
        basis[3, n_half:] = c
        basis[3, tau + n_half] = 0.0
    return basis


def project_four_state(state, tau):
    """Coefficients of the state in the four-state basis."""
    _check_tau(state, tau)
    amps = state.amplitudes
    eta = _eta_overlaps(amps, tau, state.half)
    return np.array([amps[tau], amps[tau + state.half], eta[0], eta[1]])


def fidelity(psi, phi):
    """|<phi|psi>|^2; symmetric in its arguments."""
    if psi.dim != phi.dim:
        raise SizeError(f"dimension mismatch {psi.dim} vs {phi.dim}")
    return float(abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2)


@dataclass
class TimeSeries:
    """Observables at t = 0..T_f; ``history`` has shape (T_f + 1, M) when kept."""

    w_g: np.ndarray
    w_4: np.ndarray
    fidelity: np.ndarray
    history: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)
    norm: Optional[np.ndarray] = None

    @property
    def T_f(self):
        return len(self.w_g) - 1

    @property
    def t(self):
        return np.arange(len(self.w_g))


def time_average(series, window=None):
    """Mean of w_G, w_4 and fidelity over t in [t1, t2] inclusive; default [1, T_f]."""
    t1, t2 = (1, series.T_f) if window is None else window
    if not 0 <= t1 <= t2 <= series.T_f:
        raise ValueError(f"window [{t1}, {t2}] outside [0, {series.T_f}] or empty")
    sl = slice(t1, t2 + 1)
    return {
        "w_g": float(np.mean(series.w_g[sl])),
        "w_4": float(np.mean(series.w_4[sl])),
        "fidelity": float(np.mean(series.fidelity[sl])),
    }


@dataclass
class HusimiGrid:
    """Rows are positions x in [0, M), columns momenta p = -N+1..N; both coarse-grained."""

    values: np.ndarray
    sigma2: float
    cell: tuple

    @property
    def shape(self):
        return self.values.shape


def husimi_kernel(M):
    """Periodic Gaussian window K(d) = exp(-d^2 / (4 sigma^2)), sigma^2 = M / (4 pi)."""
    sigma2 = M / (4.0 * np.pi)
    d = np.arange(M)
    d = np.minimum(d, M - d).astype(float)
    return np.exp(-d * d / (4.0 * sigma2)), sigma2


def husimi(state, cells=HUSIMI_CELLS, chunk=256):
    """Husimi density |sum_x K(x - x0) e^{-i pi p0 x / N} psi_x|^2 on the (x0, p0) torus.

    Normalized by M * ||K||^2 so any unit-norm state sums to 1, then summed
    into ``cells`` by ``cells`` blocks (fewer if M is smaller).
    """
    amps = state.amplitudes
    M = amps.shape[0]
    kernel, sigma2 = husimi_kernel(M)
    norm = M * float(np.sum(kernel ** 2))
    n_cells = min(cells, M)
    block = M // n_cells
    # column k of the FFT is momentum k mod M; reorder so p runs -N+1..N
    order = (np.arange(-M // 2 + 1, M // 2 + 1)) % M
    chunk = max(block, chunk - chunk % block)
    out = np.zeros((n_cells, n_cells))
    idx = np.arange(M)
    for start in range(0, M, chunk):
        rows = np.arange(start, min(start + chunk, M))
        window = kernel[(idx[None, :] - rows[:, None]) % M]
        dens = np.abs(np.fft.fft(window * amps[None, :], axis=1)) ** 2
        dens = dens[:, order] / norm
        coarse = dens.reshape(-1, block, n_cells, block).sum(axis=(1, 3))
        out[start // block:start // block + coarse.shape[0]] = coarse
    return HusimiGrid(out, sigma2, (block, block))


@dataclass
class SpectralDensity:
    """S at omega_k = 2 pi k / (T_f + 1), k = 0..T_f.

    The transform is sum_{t=0}^{T_f} psi_x(t) e^{i omega t} / sqrt(T_f), so for
    unit-norm states sum_k S = (T_f + 1)^2 / T_f.
    """

    S: np.ndarray
    T_f: int
    meta: dict = field(default_factory=dict)

    @property
    def omega(self):
        return 2.0 * np.pi * np.arange(len(self.S)) / len(self.S)

    def parseval_constant(self):
        return (self.T_f + 1) ** 2 / self.T_f


def _as_history(history):
    try:
        arr = np.asarray(history, dtype=np.complex128)
    except ValueError as exc:
        raise SizeError("ragged history") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise SizeError(f"history must be (T_f + 1, M), got shape {arr.shape}")
    return arr


def spectral_density(history, T_f=None, meta=None):
    """S(omega_k) = sum_x |a_x(omega_k)|^2 over T_f + 1 frequency bins.

    ``history`` is (T_f + 1, M) or a 1-D scalar signal.
    """
    arr = _as_history(history)
    n_t = arr.shape[0]
    T_f = n_t - 1 if T_f is None else T_f
    if n_t != T_f + 1:
        raise SizeError(f"history has {n_t} samples, expected T_f + 1 = {T_f + 1}")
    if T_f < 2:
        raise SizeError("need T_f >= 2")
    # e^{+i omega t} sums are the inverse FFT times its length
    a = np.fft.ifft(arr, axis=0) * (n_t / np.sqrt(T_f))
    S = np.sum(np.abs(a) ** 2, axis=1)
    return SpectralDensity(S, T_f, dict(meta or {}))


class Peak(NamedTuple):
    omega: float
    weight: float
    height: float


def spectral_peaks(spec, max_peaks=4):
    """Non-DC local maxima with their basin weights, largest weight first.

    Each non-DC bin climbs to its local maximum on the circular grid (the DC bin
    is a wall), and a peak's weight is the summed S over its basin. Frequencies
    are folded into (-pi, pi].
    """
    if max_peaks < 1:
        raise ValueError("max_peaks must be >= 1")
    S = np.asarray(spec.S if isinstance(spec, SpectralDensity) else spec, dtype=float)
    n = len(S)
    if n < 3:
        return []
    owner = np.full(n, -1)
    for k in range(1, n):
        j = k
        path = []
        while owner[j] < 0:
            path.append(j)
            left = (j - 1) % n
            right = (j + 1) % n
            best = j
            for nb in (left, right):
                if nb != 0 and S[nb] > S[best]:
                    best = nb
            if best == j:
                owner[j] = j
                break
            j = best
        top = owner[j]
        for p in path:
            owner[p] = top
    peaks = []
    for top in np.unique(owner[1:]):
        weight = float(S[owner == top].sum())
        omega = 2.0 * np.pi * top / n
        if omega > np.pi:
            omega -= 2.0 * np.pi
        peaks.append(Peak(omega, weight, float(S[top])))
    peaks.sort(key=lambda p: -p.weight)
    return peaks[:max_peaks]


def top_peak_fraction(spec, n_peaks=4):
    """Share of the non-DC weight carried by the ``n_peaks`` heaviest basins."""
    S = np.asarray(spec.S if isinstance(spec, SpectralDensity) else spec, dtype=float)
    total = float(S[1:].sum())
    if total == 0.0:
        return 0.0
    return sum(p.weight for p in spectral_peaks(S, n_peaks)) / total


# ---- emitters ----

def write_metadata(path, meta):
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _sidecar(path):
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")


def write_timeseries_csv(path, series, meta=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "w_g", "w_4", "fidelity"])
        for t in range(len(series.w_g)):
            w.writerow([t, repr(float(series.w_g[t])), repr(float(series.w_4[t])),
                        repr(float(series.fidelity[t]))])
    write_metadata(_sidecar(path), {**series.meta, **(meta or {})})


def write_spectrum_csv(path, spec, meta=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "S"])
        for om, s in zip(spec.omega, spec.S):
            w.writerow([repr(float(om)), repr(float(s))])
    write_metadata(_sidecar(path), {**spec.meta, "T_f": spec.T_f, **(meta or {})})


def write_husimi_csv(path, grid, meta=None):
    """Row-major grid; header line names the axes and cell size."""
    with open(path, "w") as fh:
        fh.write(f"# rows: position x (cells of {grid.cell[0]}), "
                 f"columns: momentum p from -N+1 to N (cells of {grid.cell[1]})\n")
        np.savetxt(fh, grid.values, delimiter=",", fmt="%.17g")
    write_metadata(_sidecar(path), {"sigma2": grid.sigma2, "cell": list(grid.cell), **(meta or {})})
