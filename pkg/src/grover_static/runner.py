"""Gate-level runs, seeded ensembles and the figure pipelines built on them."""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .circuit import apply_ideal_grover, build_grover_iteration, grover_frequency
from .config import ExperimentConfig
from .exceptions import CapacityError, PartialEnsembleError
from .imperfections import StaticNoise, build_lattice, realization_seed, sample_disorder
from .observables import (
    TimeSeries,
    fidelity,
    husimi,
    spectral_density,
    spectral_peaks,
    time_average,
    top_peak_fraction,
    w_4,
    w_g,
)
from .statevector import new_uniform_state
from .theory import mean_w_g_theory, sigma_width, single_kick_run

__version__ = "0.1.0"

WORKERS_ENV = "GROVER_WORKERS"
MAX_SIM_QUBITS = 24
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
# salt for the per-realization searched index when tau is random
_TAU_SALT = 0x5EED7A0


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def memory_estimate(n_tot, T_f=0, keep_history=False):
    """Bytes for the working vectors (state, ideal copy, three diagonals, ones) plus history."""
    vectors = 6 + ((T_f + 1) if keep_history else 0)
    return 16 * (1 << n_tot) * vectors


def check_capacity(n_tot, T_f, keep_history, budget_mb):
    if n_tot > MAX_SIM_QUBITS:
        raise CapacityError(f"n_tot={n_tot} exceeds the {MAX_SIM_QUBITS}-qubit limit")
    need = memory_estimate(n_tot, T_f, keep_history)
    if need > budget_mb * 2 ** 20:
        raise CapacityError(f"run needs {need / 2 ** 20:.1f} MiB, budget is {budget_mb} MiB")


def gate_level_run(n_q, tau, realization=None, T_f=None, substeps=1,
                   keep_history=False, snapshots=(), circuit=None):
    """Iterate the gate-built Grover step with U_S after every gate slot.

    Each slot applies the split propagator of unit duration with ``substeps``
    slices. Returns the observables for t = 0..T_f; states at the times in
    ``snapshots`` land in ``meta["snapshots"]``.
    """
    if T_f is None:
        T_f = int(round(5 * np.pi / (2 * grover_frequency(n_q))))
    circuit = circuit or build_grover_iteration(n_q, tau)
    kinds, tbits, cmasks, slots = circuit.codes
    psi = new_uniform_state(n_q)
    ideal = psi.copy()
    amps = psi.amplitudes
    n_half = psi.half
    noisy = realization is not None and (np.any(realization.a) or np.any(realization.b))
    if noisy:
        if realization.n_tot != psi.n_tot:
            raise CapacityError(f"realization has {realization.n_tot} qubits, state {psi.n_tot}")
        z_half, z_full, x_diag = StaticNoise(realization).split_factors(1.0, substeps)
        ones = np.ones(psi.dim, dtype=np.complex128)
    n = T_f + 1
    wg, w4, f, nrm = np.empty(n), np.empty(n), np.empty(n), np.empty(n)
    hist = np.empty((n, psi.dim), dtype=np.complex128) if keep_history else None
    snaps = {}
    wanted = set(int(t) for t in snapshots)
    for t in range(n):
        if t > 0:
            if noisy:
                _kernels.noisy_gate_sequence(amps, kinds, tbits, cmasks, slots, tau, n_half,
                                             z_half, z_full, x_diag, substeps, ones)
            else:
                _kernels.gate_sequence(amps, kinds, tbits, cmasks, tau, n_half)
            apply_ideal_grover(ideal, tau)
        wg[t] = w_g(psi, tau)
        w4[t] = w_4(psi, tau)
        f[t] = fidelity(psi, ideal)
        nrm[t] = psi.norm()
        if keep_history:
            hist[t] = amps
        if t in wanted:
            snaps[t] = psi.copy()
    meta = {"model": "gate_level", "n_q": n_q, "tau": tau, "T_f": T_f, "substeps": substeps,
            "n_g": circuit.n_g}
    if realization is not None:
        meta.update(eps=realization.epsilon, seed=realization.seed)
    if snaps:
        meta["snapshots"] = snaps
    return TimeSeries(wg, w4, f, hist, meta, nrm)


def choose_tau(config, seed):
    if config.tau == "random":
        rng = np.random.Generator(np.random.Philox(key=int(seed) ^ _TAU_SALT))
        return int(rng.integers(0, 1 << config.n_q))
    return int(config.tau)


def run_single(config, eps, seed, keep_history=False, snapshots=(), model="full"):
    """One realization at strength ``eps`` (absolute), either gate-level or single-kick."""
    check_capacity(config.n_tot, config.T_f, keep_history, config.memory_budget_mb)
    lattice = build_lattice(config.L_x, config.L_y)
    realization = sample_disorder(lattice, eps, seed)
    tau = choose_tau(config, seed)
    if model == "kick":
        return single_kick_run(config.n_q, tau, realization, config.R, config.T_f,
                               keep_history=keep_history)
    return gate_level_run(config.n_q, tau, realization, config.T_f, config.substeps,
                          keep_history=keep_history, snapshots=snapshots)


def _summarize_run(series, keep_spectrum):
    avg = time_average(series)
    rec = {"w_g": avg["w_g"], "w_4": avg["w_4"], "fidelity": avg["fidelity"]}
    wg_peaks = spectral_peaks(spectral_density(series.w_g), 1)
    rec["wg_peak_omega"] = abs(wg_peaks[0].omega) if wg_peaks else 0.0
    if keep_spectrum:
        spec = spectral_density(series.history)
        rec["top4_fraction"] = top_peak_fraction(spec, 4)
        rec["peaks"] = [list(p) for p in spectral_peaks(spec, 4)]
    return rec


def _run_cell(config_dict, model, i, eps, k, keep_spectrum):
    config = ExperimentConfig.from_dict(config_dict)
    seed = realization_seed(config.master_seed, k)
    start = time.perf_counter()
    series = run_single(config, eps, seed, keep_history=keep_spectrum, model=model)
    rec = _summarize_run(series, keep_spectrum)
    rec.update(i=i, k=k, seed=seed, tau=series.meta["tau"], seconds=time.perf_counter() - start)
    return rec


@dataclass
class EnsembleResult:
    """Per-(eps, realization) time averages and their per-eps statistics."""

    eps: np.ndarray
    w_g: np.ndarray
    w_4: np.ndarray
    fidelity: np.ndarray
    seeds: np.ndarray
    taus: np.ndarray
    wg_peak_omega: np.ndarray
    top4_fraction: np.ndarray = None
    peaks: list = None
    model: str = "full"
    meta: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def stats(self, name):
        """Per-eps mean, min, max, quantiles and standard error of an observable."""
        data = getattr(self, name)
        n = data.shape[1]
        out = {
            "mean": data.mean(axis=1),
            "min": data.min(axis=1),
            "max": data.max(axis=1),
            "stderr": data.std(axis=1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(len(data)),
        }
        for q, row in zip(QUANTILES, np.quantile(data, QUANTILES, axis=1)):
            out[f"q{int(round(q * 100)):02d}"] = row
        return out

    def summary_rows(self):
        g, f4 = self.stats("w_g"), self.stats("w_4")
        eps_c = self.meta.get("eps_c")
        rows = []
        for i, eps in enumerate(self.eps):
            row = {"eps": float(eps), "eps_over_eps_c": float(eps / eps_c) if eps_c else float("nan")}
            for prefix, st in (("w_g", g), ("w_4", f4)):
                for key, values in st.items():
                    row[f"{prefix}_{key}"] = float(values[i])
            rows.append(row)
        return rows

    def write(self, out_dir, stem="ensemble"):
        """CSV of realizations and of per-eps statistics, a JSON sidecar and a timing file."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{stem}_realizations.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["eps", "realization", "seed", "tau", "w_g", "w_4", "fidelity", "wg_peak_omega"]
            if self.top4_fraction is not None:
                head.append("top4_fraction")
            w.writerow(head)
            for i, eps in enumerate(self.eps):
                for k in range(self.w_g.shape[1]):
                    row = [repr(float(eps)), k, int(self.seeds[i, k]), int(self.taus[i, k]),
                           repr(float(self.w_g[i, k])), repr(float(self.w_4[i, k])),
                           repr(float(self.fidelity[i, k])), repr(float(self.wg_peak_omega[i, k]))]
                    if self.top4_fraction is not None:
                        row.append(repr(float(self.top4_fraction[i, k])))
                    w.writerow(row)
        rows = self.summary_rows()
        with open(out / f"{stem}_summary.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) for k, v in r.items()})
        (out / f"{stem}.json").write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")
        (out / f"{stem}_timing.json").write_text(json.dumps(self.timing, indent=2, sort_keys=True) + "\n")
        return out


def run_ensemble(config, model="full", workers=None, keep_spectrum=False, progress=None):
    """Run every (eps, realization) cell; realization k uses seed master ^ k at every eps.

    Results are placed by index, so the outcome does not depend on completion
    order or worker count. Failed cells raise PartialEnsembleError whose
    ``result`` holds the cells that did finish (NaN elsewhere).
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    check_capacity(config.n_tot, config.T_f, keep_spectrum, config.memory_budget_mb)
    eps_values = config.eps_values()
    n_eps, n_real = len(eps_values), config.realizations
    cells = [(i, eps, k) for i, eps in enumerate(eps_values) for k in range(n_real)]
    cfg = config.to_dict()
    records, failures = {}, {}
    start = time.perf_counter()
    if workers == 1:
        for i, eps, k in cells:
            try:
                records[(i, k)] = _run_cell(cfg, model, i, eps, k, keep_spectrum)
            except (CapacityError, KeyboardInterrupt):
                raise
            except Exception as exc:  # noqa: BLE001 - reported per cell
                failures[(i, k)] = repr(exc)
            if progress:
                progress(len(records) + len(failures), len(cells))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_cell, cfg, model, i, eps, k, keep_spectrum): (i, k)
                       for i, eps, k in cells}
            for fut in as_completed(futures):
                key = futures[fut]
                try:
                    records[key] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures[key] = repr(exc)
                if progress:
                    progress(len(records) + len(failures), len(cells))
    elapsed = time.perf_counter() - start

    def grid(name, dtype=float, fill=np.nan):
        arr = np.full((n_eps, n_real), fill, dtype=dtype)
        for (i, k), rec in records.items():
            arr[i, k] = rec[name]
        return arr

    peaks = None
    if keep_spectrum:
        peaks = [[records[(i, k)]["peaks"] if (i, k) in records else None for k in range(n_real)]
                 for i in range(n_eps)]
    result = EnsembleResult(
        eps=np.array(eps_values),
        w_g=grid("w_g"), w_4=grid("w_4"), fidelity=grid("fidelity"),
        seeds=grid("seed", np.int64, -1), taus=grid("tau", np.int64, -1),
        wg_peak_omega=grid("wg_peak_omega"),
        top4_fraction=grid("top4_fraction") if keep_spectrum else None,
        peaks=peaks, model=model,
        meta={"config": cfg, "model": model, "n_tot": config.n_tot, "n_g": config.n_g,
              "eps_c": config.eps_c, "T_f": config.T_f, "version": __version__,
              "rng": "numpy Philox4x64-10, key = master_seed ^ realization"},
        timing={"seconds_total": elapsed, "workers": workers,
                "cell_seconds": [records[c]["seconds"] for c in sorted(records)]},
    )
    if failures:
        err = PartialEnsembleError(f"{len(failures)} of {len(cells)} cells failed",
                                   sorted(records), failures)
        err.result = result
        raise err
    return result


@dataclass
class PhaseDiagram:
    eps: np.ndarray
    omega: np.ndarray
    S: np.ndarray
    top4_fraction: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def write(self, path):
        """Matrix CSV: first column eps, remaining columns S at each omega."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps"] + [f"omega={om:.10g}" for om in self.omega])
            for eps, row in zip(self.eps, self.S):
                w.writerow([repr(float(eps))] + [repr(float(v)) for v in row])
        Path(str(path) + ".json").write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")


def scan_phase_diagram(config, seed=None):
    """Spectral density rows over the eps grid for one disorder shape rescaled by eps."""
    seed = realization_seed(config.master_seed, 0) if seed is None else seed
    rows, fractions = [], []
    for eps in config.eps_values():
        series = run_single(config, eps, seed, keep_history=True)
        spec = spectral_density(series.history)
        rows.append(spec.S)
        fractions.append(top_peak_fraction(spec, 4))
    S = np.array(rows)
    omega = 2.0 * np.pi * np.arange(S.shape[1]) / S.shape[1]
    meta = {"config": config.to_dict(), "seed": seed, "T_f": config.T_f, "eps_c": config.eps_c,
            "version": __version__}
    return PhaseDiagram(np.array(config.eps_values()), omega, S, np.array(fractions), seed, meta)


def husimi_snapshots(config, times, eps=None, seed=None, cells=128):
    """Husimi grids at the requested iteration counts, one list per eps value."""
    if any(t > config.T_f or t < 0 for t in times):
        raise ValueError(f"times must lie in [0, T_f={config.T_f}]")
    seed = realization_seed(config.master_seed, 0) if seed is None else seed
    eps_list = config.eps_values() if eps is None else list(eps)
    out = {}
    for e in eps_list:
        series = run_single(config, e, seed, snapshots=times)
        snaps = series.meta["snapshots"]
        out[e] = [(t, husimi(snaps[t], cells), float(series.w_4[t])) for t in times]
    return out


def compare_models(configs, workers=None, progress=None):
    """Aligned full-simulation, single-kick and theory columns for each config."""
    rows = []
    for config in configs:
        full = run_ensemble(config, "full", workers, progress=progress)
        kick = run_ensemble(config, "kick", workers, progress=progress)
        fg, f4 = full.stats("w_g"), full.stats("w_4")
        kg, k4 = kick.stats("w_g"), kick.stats("w_4")
        om = grover_frequency(config.n_q)
        for i, eps in enumerate(full.eps):
            sigma = sigma_width(eps, config.R, config.n_g, config.n_q)
            rows.append({
                "n_tot": config.n_tot, "eps": float(eps), "eps_over_eps_c": float(eps / config.eps_c),
                "full_w_g": fg["mean"][i], "full_w_g_min": fg["min"][i], "full_w_g_max": fg["max"][i],
                "full_w_4": f4["mean"][i], "full_w_4_min": f4["min"][i], "full_w_4_max": f4["max"][i],
                "kick_w_g": kg["mean"][i], "kick_w_g_min": kg["min"][i], "kick_w_g_max": kg["max"][i],
                "kick_w_4": k4["mean"][i], "kick_w_4_min": k4["min"][i], "kick_w_4_max": k4["max"][i],
                "theory_w_g": float(mean_w_g_theory(sigma, om)), "R": config.R,
            })
    return rows


def write_rows_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in r.items()})
