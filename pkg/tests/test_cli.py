import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from grover_static.cli import EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, main
from grover_static.imperfections import load_realization


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_theory_prints_eps_c(capsys):
    assert main(["theory", "--lattice", "3x4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "n_g=102" in out and "eps_c=0.00481" in out
    assert out.count("eps/eps_c=") == 6


def test_theory_csv(tmp_path):
    assert main(["theory", "--lattice", "4x4", "--eps", "0.5,1", "--relative", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "theory.csv")
    assert [round(float(r["eps_over_eps_c"]), 12) for r in rows] == [0.5, 1.0]


def test_circuit_dump(tmp_path, capsys):
    assert main(["circuit", "--n-q", "11", "--tau", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# grover iteration n_q=11 tau=5 n_g=102"
    assert len(lines) == 1 + 103
    assert lines[1].startswith("ORACLE 5")
    assert sum(1 for line in lines if line.startswith("CCX ")) == 56
    main(["circuit", "--n-q", "6", "--out", str(tmp_path / "c.txt")])
    assert (tmp_path / "c.txt").read_text().startswith("# grover iteration n_q=6")


def test_realization_dump_round_trip(tmp_path):
    path = tmp_path / "r.txt"
    assert main(["realization", "--lattice", "3x3", "--eps", "2e-3", "--seed", "7", "--k", "2",
                 "--out", str(path)]) == EXIT_OK
    r = load_realization(path)
    assert r.n_tot == 9 and r.seed == 7 ^ 2
    assert np.all(np.abs(r.a) <= 2e-3)


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--lattice", "2x3", "--eps=-1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    (tmp_path / "c.json").write_text('{"L_x": 2, "wibble": 1}')
    assert main(["ensemble", "--config", str(tmp_path / "c.json")]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        main(["run", "--lattice", "three"])
    assert info.value.code == 2


def test_capacity_exit_3(tmp_path):
    assert main(["run", "--lattice", "5x5", "--out", str(tmp_path)]) == EXIT_CAPACITY
    assert main(["run", "--lattice", "3x4", "--memory-mb", "0.1", "--out", str(tmp_path)]) == EXIT_CAPACITY


def test_partial_ensemble_exit_4(tmp_path, monkeypatch):
    import grover_static.runner as runner

    def broken(*args, **kw):
        raise RuntimeError("boom")

    monkeypatch.setattr(runner, "run_single", broken)
    code = main(["ensemble", "--lattice", "2x3", "--eps", "1e-3", "--realizations", "2",
                 "--out", str(tmp_path), "--workers", "1"])
    assert code == EXIT_PARTIAL
    assert (tmp_path / "ensemble_full_partial_realizations.csv").exists()


def test_run_writes_series_and_spectrum(tmp_path):
    assert main(["run", "--lattice", "2x4", "--eps", "0,1e-3", "--spectrum", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "run_full_eps00.csv")
    assert list(rows[0]) == ["t", "w_g", "w_4", "fidelity"]
    theta = np.arcsin(2 ** -3.5)
    for r in rows:
        t = int(r["t"])
        assert abs(float(r["w_g"]) - np.sin((2 * t + 1) * theta) ** 2) < 1e-12
    meta = json.loads((tmp_path / "run_full_eps01.csv.json").read_text())
    assert meta["eps"] == 1e-3 and meta["lattice"] == [2, 4]
    assert _rows(tmp_path / "run_full_eps01_spectrum.csv")[0].keys() == {"omega", "S"}


def test_ensemble_and_fit_r(tmp_path, capsys):
    out = tmp_path / "ens"
    args = ["ensemble", "--lattice", "2x3", "--eps", "0.25,0.5,1,2,4", "--relative",
            "--realizations", "4", "--out", str(out)]
    assert main(args) == EXIT_OK
    summary = _rows(out / "ensemble_full_summary.csv")
    assert len(summary) == 5 and "w_4_q50" in summary[0]
    assert len(_rows(out / "ensemble_full_realizations.csv")) == 20
    capsys.readouterr()
    assert main(["fit-r", str(out / "ensemble_full"), "--bootstrap", "20"]) == EXIT_OK
    line = capsys.readouterr().out
    assert line.startswith("R=")
    R = float(line.split()[0][2:])
    assert 1e-3 <= R <= 1.0


def test_config_file_with_flag_override(tmp_path):
    cfg = {"L_x": 2, "L_y": 3, "eps": [1e-3], "realizations": 2, "output_dir": str(tmp_path / "a")}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["ensemble", "--config", str(tmp_path / "c.json"), "--realizations", "3"]) == 0
    meta = json.loads((tmp_path / "a" / "ensemble_full.json").read_text())
    assert meta["config"]["realizations"] == 3 and meta["config"]["L_y"] == 3


def test_husimi_and_phase_diagram_commands(tmp_path):
    assert main(["husimi", "--lattice", "2x3", "--eps", "0,1e-3", "--times", "0,2",
                 "--out", str(tmp_path)]) == 0
    grid = np.loadtxt(tmp_path / "husimi_eps01_t002.csv", delimiter=",", comments="#")
    assert grid.shape == (64, 64) and abs(grid.sum() - 1) < 1e-10
    assert main(["phase-diagram", "--lattice", "2x3", "--eps", "0,0.5,2", "--relative",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "phase_diagram.csv")
    assert len(rows) == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "grover_static.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.1.0"
