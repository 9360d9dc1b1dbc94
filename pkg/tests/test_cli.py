import csv
import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from npvarsel.cli import build_parser, main
from npvarsel.conditions import consistency_conditions, prop2_lhs
from npvarsel.params import ModelParams
from npvarsel.theta_saddle import regime_constants

SUBCOMMANDS = ("count", "saddle", "curve", "regime", "select", "simulate")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_params(path, **kw):
    base = dict(d=10, d_star=1, g_min=1, L=1, kappa=1, sigma=1, L2=1, L_inf=1)
    base.update(kw)
    path.write_text("".join(f"{k} = {v}\n" for k, v in base.items()))
    return path


class TestCount:
    def test_plain(self, capsys):
        code, out, _ = run(capsys, "count", "--dstar", 2, "--radius-sq", 2, "--format", "plain")
        assert code == 0
        assert out.splitlines()[0] == "N1=9 N2=3 N=6"

    def test_gamma(self, capsys):
        code, out, _ = run(capsys, "count", "--dstar", 1, "--gamma", 1)
        assert code == 0 and out.startswith("N1=3 ")

    def test_zero_radius(self, capsys):
        _, out, _ = run(capsys, "count", "--dstar", 3, "--radius-sq", 0, "--format", "json")
        data = json.loads(out)
        assert data["N"] == 0 and data["N1"] == 1 and data["logN"] is None

    def test_big_integers_exact(self, capsys):
        _, out, _ = run(capsys, "count", "--dstar", 40, "--radius-sq", 60, "--format", "csv")
        row = next(csv.DictReader(out.splitlines()))
        from npvarsel.lattice_count import count_exact
        assert int(row["N1"]) == count_exact(40, 60).n1

    @pytest.mark.parametrize("argv", [
        ["count", "--dstar", "2"],
        ["count", "--dstar", "2", "--gamma", "1", "--radius-sq", "2"],
        ["count", "--dstar", "0", "--radius-sq", "2"],
        ["count", "--dstar", "2", "--radius-sq", "-1"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and "error" in err


class TestSaddleCurve:
    def test_saddle_residual(self, capsys):
        code, out, _ = run(capsys, "saddle", "--gamma", 1, "--tol", "1e-12", "--format", "json")
        data = json.loads(out)
        assert code == 0
        assert data["residual"] <= 1e-12
        # phi(y) = 1/(2y) up to exponentially small theta corrections, so z_1 is close to e^{-1/2}
        assert data["z_gamma"] == pytest.approx(math.exp(-0.5), abs=1e-6)

    def test_saddle_plain_fields(self, capsys):
        _, out, _ = run(capsys, "saddle", "--gamma", 2)
        keys = [tok.split("=")[0] for tok in out.split()]
        assert {"z_gamma", "l_value", "l_second", "residual"} <= set(keys)

    def test_saddle_failure_exit_1(self, capsys):
        code, _, err = run(capsys, "saddle", "--gamma", 8, "--tol", "1e-30")
        assert code == 1 and "failed" in err

    def test_curve(self, capsys, tmp_path):
        out = tmp_path / "curve.csv"
        code, _, _ = run(capsys, "curve", "--gamma-min", 0.1, "--gamma-max", 10, "--steps", 30,
                         "--spacing", "log", "--out", out)
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert list(rows[0]) == ["gamma", "z_gamma", "l_value"]
        assert len(rows) == 30
        z = np.array([float(r["z_gamma"]) for r in rows])
        assert np.all(np.diff(z) > 0) and np.all((z > 0) & (z < 1))

    def test_curve_manifest_checksum(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        run(capsys, "curve", "--gamma-min", 0.5, "--gamma-max", 2, "--steps", 5, "--out", out)
        manifest = json.loads((tmp_path / "c.csv.manifest.json").read_text())
        assert manifest["checksum"] == hashlib.sha256(out.read_bytes()).hexdigest()
        assert manifest["subcommand"] == "curve"
        # re-running with the manifest's parameters reproduces the checksum
        p = manifest["params"]
        out2 = tmp_path / "c2.csv"
        run(capsys, "curve", "--gamma-min", p["gamma_min"], "--gamma-max", p["gamma_max"],
            "--steps", p["steps"], "--spacing", p["spacing"], "--out", out2)
        assert hashlib.sha256(out2.read_bytes()).hexdigest() == manifest["checksum"]

    def test_curve_round_trip(self, capsys, tmp_path):
        from npvarsel.theta_saddle import figure_curves
        out = tmp_path / "c.csv"
        run(capsys, "curve", "--gamma-min", 0.3, "--gamma-max", 3, "--steps", 7, "--out", out)
        parsed = np.array([[float(v) for v in r] for r in list(csv.reader(out.open()))[1:]])
        assert np.array_equal(parsed, figure_curves(np.linspace(0.3, 3, 7)))

    def test_curve_stdout(self, capsys):
        code, out, _ = run(capsys, "curve", "--gamma-min", 1, "--gamma-max", 2, "--steps", 3, "--out", "-")
        assert code == 0 and out.splitlines()[0] == "gamma,z_gamma,l_value"

    def test_curve_bad_grid(self, capsys):
        code, _, _ = run(capsys, "curve", "--gamma-min", 2, "--gamma-max", 1, "--steps", 3, "--out", "-")
        assert code == 2


class TestRegime:
    def test_c_star_upper(self, capsys, tmp_path):
        f = write_params(tmp_path / "p.txt", L=4)
        code, out, _ = run(capsys, "regime", "--params", f, "--n", 100)
        assert code == 0
        assert json.loads(out)["c_star_upper"] == pytest.approx(5.4190, abs=1e-4)

    def test_flags_match_direct(self, capsys, tmp_path):
        kw = dict(d=1000, d_star=3, L=3, kappa=1, sigma=0.5, L2=1, L_inf=2)
        f = write_params(tmp_path / "p.txt", alpha=0.25, **kw)
        _, out, _ = run(capsys, "regime", "--params", f, "--n", 40)
        data = json.loads(out)
        params = ModelParams(g_min=1, **kw)
        direct = regime_constants(params, 40, 0.25)
        assert data["flags"] == direct.flags
        a, b = consistency_conditions(params, 40)
        assert data["flags"]["thm1_cond_a"] == a and data["flags"]["thm1_cond_b"] == b
        assert data["flags"]["prop2_impossible"] == (prop2_lhs(1000, 3, 40) >= 1 / 0.25)

    def test_unknown_key(self, capsys, tmp_path):
        f = write_params(tmp_path / "p.txt", n=10)
        f.write_text(f.read_text() + "bogus = 3\n")
        code, _, err = run(capsys, "regime", "--params", f)
        assert code == 2
        assert "bogus = 3" in err

    def test_missing_key(self, capsys, tmp_path):
        f = tmp_path / "p.txt"
        f.write_text("d = 10\nn = 5\n")
        code, _, err = run(capsys, "regime", "--params", f)
        assert code == 2 and "d_star" in err


def write_data(path, X, Y):
    d = X.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(1, d + 1)] + ["y"])
        for x, y in zip(X, Y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])
    return path


class TestSelect:
    def test_end_to_end(self, capsys, tmp_path):
        rng = np.random.default_rng(17)
        X = rng.random((3000, 5))
        Y = math.sqrt(2) * np.cos(2 * math.pi * X[:, 0])
        data = write_data(tmp_path / "data.csv", X, Y)
        params = write_params(tmp_path / "p.txt", d=5, sigma=0.1, L_inf=2)
        code, out, _ = run(capsys, "select", "--data", data, "--params", params)
        assert code == 0
        assert out.splitlines()[0] == "selected=1"
        assert any(line.startswith("witness k=[1:1] cos") for line in out.splitlines())

    def test_json(self, capsys, tmp_path):
        rng = np.random.default_rng(18)
        X = rng.random((500, 3))
        data = write_data(tmp_path / "data.csv", X, np.zeros(500))
        params = write_params(tmp_path / "p.txt", d=3)
        _, out, _ = run(capsys, "select", "--data", data, "--params", params, "--format", "json")
        assert json.loads(out)["selected"] == []

    def test_empty_file(self, capsys, tmp_path):
        data = tmp_path / "empty.csv"
        data.write_text("")
        params = write_params(tmp_path / "p.txt", d=3)
        code, _, _ = run(capsys, "select", "--data", data, "--params", params)
        assert code == 2

    def test_header_only(self, capsys, tmp_path):
        data = tmp_path / "h.csv"
        data.write_text("x1,x2,x3,y\n")
        code, _, _ = run(capsys, "select", "--data", data, "--params", write_params(tmp_path / "p.txt", d=3))
        assert code == 2

    def test_ragged_row_reports_line(self, capsys, tmp_path):
        data = tmp_path / "bad.csv"
        data.write_text("x1,x2,y\n0.1,0.2,1.0\n0.3,0.4\n")
        code, _, err = run(capsys, "select", "--data", data, "--params", write_params(tmp_path / "p.txt", d=2))
        assert code == 2 and ":3:" in err

    def test_out_of_range(self, capsys, tmp_path):
        data = tmp_path / "bad.csv"
        data.write_text("x1,x2,y\n0.1,1.5,1.0\n")
        code, _, err = run(capsys, "select", "--data", data, "--params", write_params(tmp_path / "p.txt", d=2))
        assert code == 2 and ":2:" in err

    def test_dimension_mismatch(self, capsys, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("x1,x2,y\n0.1,0.5,1.0\n")
        code, _, _ = run(capsys, "select", "--data", data, "--params", write_params(tmp_path / "p.txt", d=3))
        assert code == 2


SIM_CONFIG = """\
d = 10
d_star = 2
sigma = 0.1
L = 1
kappa = 1
amplitudes = 1:1, 2:1
n = {grid}
trials = {trials}
seed = 2024
"""


class TestSimulate:
    def test_error_column_non_increasing(self, capsys, tmp_path):
        cfg = tmp_path / "sim.txt"
        cfg.write_text(SIM_CONFIG.format(grid="100, 1000, 4000", trials=40))
        out = tmp_path / "sim.csv"
        code, _, _ = run(capsys, "simulate", "--config", cfg, "--out", out)
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert list(rows[0]) == ["n", "d", "dstar", "error_rate", "trials", "seed"]
        rates = [float(r["error_rate"]) for r in rows]
        assert all(b <= a + 1 / 40 for a, b in zip(rates, rates[1:]))
        assert rates[0] > rates[-1]
        manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
        assert manifest["checksum"] == hashlib.sha256(out.read_bytes()).hexdigest()
        assert manifest["seed"] == 2024 and manifest["params"]["n_grid"] == [100, 1000, 4000]

    def test_deterministic_across_threads(self, capsys, tmp_path):
        cfg = tmp_path / "sim.txt"
        cfg.write_text(SIM_CONFIG.format(grid="200, 800", trials=12))
        outs = []
        for i, threads in enumerate((1, 1, 4)):
            out = tmp_path / f"s{i}.csv"
            run(capsys, "simulate", "--config", cfg, "--out", out, "--threads", threads)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_seed_flag_overrides(self, capsys, tmp_path):
        cfg = tmp_path / "sim.txt"
        cfg.write_text(SIM_CONFIG.format(grid="100", trials=3))
        run(capsys, "simulate", "--config", cfg, "--out", tmp_path / "o.csv", "--seed", 5)
        assert next(csv.DictReader((tmp_path / "o.csv").open()))["seed"] == "5"

    def test_random_pattern(self, capsys, tmp_path):
        cfg = tmp_path / "sim.txt"
        cfg.write_text("d = 8\nd_star = 2\nL = 1.5\nrandom_pattern = true\nn = 2000\ntrials = 4\nlambda = 0.45\n")
        code, _, _ = run(capsys, "simulate", "--config", cfg, "--out", tmp_path / "o.csv")
        assert code == 0
        assert float(next(csv.DictReader((tmp_path / "o.csv").open()))["error_rate"]) == 0.0

    @pytest.mark.parametrize("body", [
        "d = 10\nd_star = 2\nn = 100\ntrials = 2\n",                        # no function
        "d = 10\nd_star = 2\nn = 100\ntrials = 2\namplitudes = 11:1\n",    # out of range
        "d = 10\nd_star = 1\nn = 100\ntrials = 2\namplitudes = 1:1, 2:1\n",  # too many
        "d = 10\nd_star = 2\nn = 1e2, x\ntrials = 2\namplitudes = 1:1\n",   # bad grid
    ])
    def test_config_errors(self, capsys, tmp_path, body):
        cfg = tmp_path / "sim.txt"
        cfg.write_text(body)
        code, _, _ = run(capsys, "simulate", "--config", cfg, "--out", tmp_path / "o.csv")
        assert code == 2
        assert not (tmp_path / "o.csv").exists()


class TestHelp:
    @pytest.mark.parametrize("name", SUBCOMMANDS)
    def test_lists_every_flag(self, capsys, name):
        parser = build_parser()
        sub = next(a for a in parser._actions if a.dest == "command").choices[name]
        flags = {s for a in sub._actions for s in a.option_strings if s.startswith("--")}
        with pytest.raises(SystemExit) as info:
            main([name, "--help"])
        assert info.value.code == 0
        text = capsys.readouterr().out
        for flag in flags:
            assert flag in text
        assert {"--seed", "--threads", "--format"} <= flags

    def test_bad_flag_exit_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["count", "--nope"])
        assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "npvarsel", "count", "--dstar", "2", "--radius-sq", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("N1=9 N2=3 N=6")
