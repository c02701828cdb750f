"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 partial ensemble (some cells failed; finished cells are still written).
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit import build_grover_iteration, format_circuit, grover_frequency, grover_period
from .config import ExperimentConfig
from .exceptions import CapacityError, ConfigError, PartialEnsembleError
from .imperfections import build_lattice, dump_realization, realization_seed, sample_disorder
from .observables import spectral_density, write_husimi_csv, write_spectrum_csv, write_timeseries_csv
from .runner import (
    __version__,
    compare_models,
    husimi_snapshots,
    run_ensemble,
    run_single,
    scan_phase_diagram,
    write_rows_csv,
)
from .theory import (
    DEFAULT_R,
    epsilon_critical,
    fit_kick_factor,
    operations_budget,
    sigma_width,
    theory_curve,
    write_theory_csv,
)

log = logging.getLogger("grover_static")

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_PARTIAL = 0, 2, 3, 4
FIG4_GRID = [0.25, 0.3, 0.5, 1.0, 2.0, 4.0]


def _lattice(text):
    try:
        lx, ly = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"lattice must look like 3x4, got {text!r}") from exc
    return lx, ly


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _tau(text):
    return text if text == "random" else int(text)


def add_config_flags(p):
    p.add_argument("--config", help="JSON config file; flags below override it")
    p.add_argument("--lattice", type=_lattice, help="lattice as LxxLy, e.g. 3x4")
    p.add_argument("--eps", type=_floats, help="comma-separated imperfection strengths")
    p.add_argument("--relative", action="store_true", default=None,
                   help="read --eps in units of eps_c")
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int, dest="master_seed", help="master seed")
    p.add_argument("--tau", type=_tau, help="searched index or 'random'")
    p.add_argument("--R", type=float, help=f"kick factor (default {DEFAULT_R})")
    p.add_argument("--tf-mult", type=float, dest="tf_multiplier", help="T_f in units of T_G")
    p.add_argument("--substeps", type=int, help="split slices per gate slot")
    p.add_argument("--memory-mb", type=float, dest="memory_budget_mb")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--workers", type=int, help="worker processes (env GROVER_WORKERS)")
    p.add_argument("--image", action="store_true", help="also render PNG heatmaps")


def config_from_args(args, **preset):
    base = ExperimentConfig.load(args.config).to_dict() if getattr(args, "config", None) else {}
    base.update(preset)
    if getattr(args, "lattice", None):
        base["L_x"], base["L_y"] = args.lattice
    if getattr(args, "relative", None):
        base["eps_relative"] = True
    for key in ("eps", "realizations", "master_seed", "tau", "R", "tf_multiplier", "substeps",
                "memory_budget_mb", "output_dir"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if getattr(args, "image", False):
        base["emit_heatmaps"] = True
    return ExperimentConfig.from_dict(base)


def _out(config):
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def render_heatmap(matrix, path, xlabel, ylabel, extent=None, title=None):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(matrix, aspect="auto", origin="lower", extent=extent, cmap="viridis")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _progress(done, total):
    if done == total or done % max(1, total // 20) == 0:
        log.info("%d/%d cells", done, total)


# ---- subcommands ----

def cmd_run(args, **preset):
    config = config_from_args(args, **preset)
    out = _out(config)
    for k, eps in enumerate(config.eps_values()):
        seed = realization_seed(config.master_seed, 0)
        series = run_single(config, eps, seed, keep_history=args.spectrum, model=args.model)
        stem = f"run_{args.model}_eps{k:02d}"
        meta = {"eps": eps, "seed": seed, "lattice": [config.L_x, config.L_y], "T_f": config.T_f,
                "model": args.model, "version": __version__}
        write_timeseries_csv(out / f"{stem}.csv", series, meta)
        if args.spectrum:
            write_spectrum_csv(out / f"{stem}_spectrum.csv", spectral_density(series.history), meta)
        print(f"eps={eps:.6g} mean w_G={series.w_g[1:].mean():.6f} mean w_4={series.w_4[1:].mean():.6f}"
              f" -> {out / stem}.csv")
    return EXIT_OK


def cmd_ensemble(args, **preset):
    config = config_from_args(args, **preset)
    out = _out(config)
    try:
        result = run_ensemble(config, args.model, args.workers, keep_spectrum=args.spectrum,
                              progress=_progress)
    except PartialEnsembleError as exc:
        exc.result.write(out, f"ensemble_{args.model}_partial")
        raise
    result.write(out, f"ensemble_{args.model}")
    for row in result.summary_rows():
        print(f"eps={row['eps']:.6g} eps/eps_c={row['eps_over_eps_c']:.3f} "
              f"w_G={row['w_g_mean']:.5f} w_4={row['w_4_mean']:.5f}")
    return EXIT_OK


def cmd_phase_diagram(args, **preset):
    config = config_from_args(args, **preset)
    out = _out(config)
    diagram = scan_phase_diagram(config)
    diagram.write(out / "phase_diagram.csv")
    if config.emit_heatmaps:
        omega = np.where(diagram.omega > np.pi, diagram.omega - 2 * np.pi, diagram.omega)
        order = np.argsort(omega)
        render_heatmap(diagram.S[:, order], out / "phase_diagram.png", "omega", "eps index")
    for eps, frac in zip(diagram.eps, diagram.top4_fraction):
        print(f"eps={eps:.6g} top-4 peak share={frac:.3f}")
    return EXIT_OK


def cmd_husimi(args, **preset):
    config = config_from_args(args, **preset)
    out = _out(config)
    grids = husimi_snapshots(config, args.times)
    for j, (eps, snaps) in enumerate(grids.items()):
        for t, grid, w4 in snaps:
            stem = out / f"husimi_eps{j:02d}_t{t:03d}"
            write_husimi_csv(f"{stem}.csv", grid, {"eps": eps, "t": t, "w_4": w4,
                                                   "lattice": [config.L_x, config.L_y]})
            if config.emit_heatmaps:
                render_heatmap(grid.values, f"{stem}.png", "p", "x", title=f"eps={eps:g} t={t}")
            print(f"eps={eps:.6g} t={t} w_4={w4:.4f} max cell={grid.values.max():.4g} -> {stem}.csv")
    return EXIT_OK


def cmd_compare(args, **preset):
    lattices = args.lattices or [(3, 3), (3, 4)]
    base = config_from_args(args, **preset)
    configs = [replace(base, L_x=lx, L_y=ly) for lx, ly in lattices]
    out = _out(base)
    rows = compare_models(configs, args.workers, progress=_progress)
    write_rows_csv(out / "compare.csv", rows)
    for r in rows:
        print(f"n_tot={r['n_tot']} eps/eps_c={r['eps_over_eps_c']:.3f} full={r['full_w_g']:.4f} "
              f"kick={r['kick_w_g']:.4f} theory={r['theory_w_g']:.4f} "
              f"w4 full={r['full_w_4']:.4f} kick={r['kick_w_4']:.4f}")
    per_n = {}
    for r in rows:
        per_n.setdefault(r["n_tot"], []).append(r)
    fits = {}
    for n_tot, rs in per_n.items():
        if len(rs) >= 4:
            fit = fit_kick_factor([r["eps"] for r in rs], [r["full_w_g"] for r in rs], n_tot - 1)
            fits[n_tot] = fit.__dict__
            print(f"n_tot={n_tot} fitted R={fit.R:.3f} [{fit.ci_low:.3f}, {fit.ci_high:.3f}]")
    (out / "compare_fit.json").write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_theory(args):
    lx, ly = args.lattice or (3, 4)
    n_tot = lx * ly
    n_g = build_grover_iteration(n_tot - 1, 0).n_g
    eps_c = epsilon_critical(n_g, n_tot)
    grid = args.eps or list(np.array(FIG4_GRID) * eps_c)
    if args.relative:
        grid = [e * eps_c for e in grid]
    rows = theory_curve(grid, n_tot, args.R or DEFAULT_R)
    om = grover_frequency(n_tot - 1)
    print(f"n_tot={n_tot} n_g={n_g} omega_G={om:.7g} T_G={grover_period(n_tot - 1):.4f} eps_c={eps_c:.6g}")
    for eps, sigma, w, rel in rows:
        budget = operations_budget(sigma, om, eps, eps_c) if eps > 0 else {}
        extra = " ".join(f"{k}={v:.3g}" for k, v in budget.items())
        print(f"eps={eps:.6g} eps/eps_c={rel:.3f} sigma={sigma:.5g} w_G={w:.5f} {extra}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_theory_csv(Path(args.out) / "theory.csv", rows)
    return EXIT_OK


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_fit_r(args):
    stem = Path(args.ensemble)
    meta = json.loads(Path(f"{stem}.json").read_text())
    summary = _read_csv(f"{stem}_summary.csv")
    eps = [float(r["eps"]) for r in summary]
    w = [float(r["w_g_mean"]) for r in summary]
    per = None
    real_path = Path(f"{stem}_realizations.csv")
    if real_path.exists():
        groups = {}
        for r in _read_csv(real_path):
            groups.setdefault(float(r["eps"]), []).append(float(r["w_g"]))
        per = [groups[e] for e in eps]
    fit = fit_kick_factor(eps, w, meta["n_tot"] - 1, meta["n_g"], per_realization=per,
                          n_boot=args.bootstrap, seed=args.seed)
    print(f"R={fit.R:.4f} CI=[{fit.ci_low:.4f}, {fit.ci_high:.4f}] residual={fit.residual:.3g}")
    return EXIT_OK


def cmd_circuit(args):
    text = format_circuit(build_grover_iteration(args.n_q, args.tau))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_realization(args):
    lx, ly = args.lattice or (3, 4)
    real = sample_disorder(build_lattice(lx, ly), args.eps, realization_seed(args.seed, args.k))
    text = dump_realization(real, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# ---- figure presets ----

def cmd_fig1(args):
    args.spectrum = False
    args.model = "full"
    return cmd_run(args, L_x=3, L_y=4, eps=[0.0, 4e-4, 1e-3], tau=0,
                   output_dir=args.output_dir or "fig1")


def cmd_fig2(args):
    args.times = args.times or [0, 17, 34]
    return cmd_husimi(args, L_x=3, L_y=4, eps=[0.0, 1e-3, 8e-3], tau=0,
                      output_dir=args.output_dir or "fig2")


def cmd_fig3(args):
    lattice_eps_c = epsilon_critical(build_grover_iteration(11, 0).n_g, 12)
    grid = list(np.linspace(0.0, 2.5 * lattice_eps_c, 41))
    return cmd_phase_diagram(args, L_x=3, L_y=4, eps=grid, tau=0,
                             output_dir=args.output_dir or "fig3")


def cmd_fig4(args):
    args.lattices = args.lattices or [(3, 3), (3, 4)]
    return cmd_compare(args, eps=FIG4_GRID, eps_relative=True, realizations=100, tau=0,
                       output_dir=args.output_dir or "fig4")


def build_parser():
    p = argparse.ArgumentParser(prog="grover-static",
                                description="Grover search with static imperfections")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="single realization time series")
    add_config_flags(s)
    s.add_argument("--model", choices=["full", "kick"], default="full")
    s.add_argument("--spectrum", action="store_true", help="also write S(omega)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("ensemble", help="seeded ensemble over the eps grid")
    add_config_flags(s)
    s.add_argument("--model", choices=["full", "kick"], default="full")
    s.add_argument("--spectrum", action="store_true", help="record spectral peak statistics")
    s.set_defaults(func=cmd_ensemble)

    s = sub.add_parser("phase-diagram", help="S(omega) rows for a rescaled disorder shape")
    add_config_flags(s)
    s.set_defaults(func=cmd_phase_diagram)

    s = sub.add_parser("husimi", help="Husimi grids at chosen times")
    add_config_flags(s)
    s.add_argument("--times", type=_ints, default=[0, 17, 34])
    s.set_defaults(func=cmd_husimi)

    s = sub.add_parser("compare", help="full vs single-kick vs theory table")
    add_config_flags(s)
    s.add_argument("--lattices", type=_lattice, nargs="+")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("theory", help="eps_c, sigma and the averaged w_G curve")
    s.add_argument("--lattice", type=_lattice)
    s.add_argument("--eps", type=_floats)
    s.add_argument("--relative", action="store_true")
    s.add_argument("--R", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_theory)

    s = sub.add_parser("fit-r", help="fit the kick factor to ensemble output")
    s.add_argument("ensemble", help="output stem, e.g. out/ensemble_full")
    s.add_argument("--bootstrap", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_fit_r)

    s = sub.add_parser("circuit", help="dump the gate list of one iteration")
    s.add_argument("--n-q", type=int, default=11)
    s.add_argument("--tau", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_circuit)

    s = sub.add_parser("realization", help="dump one disorder realization")
    s.add_argument("--lattice", type=_lattice)
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--seed", type=int, default=12345)
    s.add_argument("--k", type=int, default=0, help="realization counter")
    s.add_argument("--out")
    s.set_defaults(func=cmd_realization)

    for name, func in (("fig1", cmd_fig1), ("fig2", cmd_fig2), ("fig3", cmd_fig3), ("fig4", cmd_fig4)):
        s = sub.add_parser(name, help=f"{name} reproduction preset")
        add_config_flags(s)
        if name == "fig2":
            s.add_argument("--times", type=_ints)
        if name == "fig4":
            s.add_argument("--lattices", type=_lattice, nargs="+")
        s.set_defaults(func=func)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except PartialEnsembleError as exc:
        print(f"partial ensemble: {exc}; completed cells: {len(exc.completed)}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
