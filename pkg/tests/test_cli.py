"""End-to-end checks of the command-line surface: wiring, file formats,
config precedence, determinism, and exit codes."""

import json
import math

import numpy as np
import pytest

from rtoa.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestVerifyAlgebra:
    def test_prints_operator_and_zero_residual(self, capsys):
        code, out, err = run(capsys, "verify-algebra")
        assert code == 0
        assert "T[-1,1]  s3: -1" in out
        assert "T[+1,1]  s2: -1/2i  s3: -1/2" in out
        assert "residual" in out
        assert "status: ok (exact)" in out
        assert "effective config" in err

    def test_runtime_under_a_second(self, capsys):
        import time

        start = time.time()
        code, _, _ = run(capsys, "verify-algebra")
        assert code == 0
        assert time.time() - start < 1.0


class TestEigenfunctionCsv:
    def test_csv_columns_and_config_header(self, tmp_path, capsys):
        out = tmp_path / "eig.csv"
        code, _, _ = run(
            capsys,
            "--out", str(out),
            "eigenfunction", "--tau", "0.5", "--pmin", "-2", "--pmax", "2", "--n", "5",
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config:")
        assert lines[1] == "p,re_upper,im_upper,re_lower,im_lower"
        assert len(lines) == 2 + 5

    def test_negative_charge_occupies_lower(self, tmp_path, capsys):
        out = tmp_path / "eig.csv"
        code, _, _ = run(
            capsys,
            "--out", str(out),
            "eigenfunction", "--lambda", "-1", "--tau", "0.0",
            "--pmin", "0.5", "--pmax", "1.5", "--n", "3",
        )
        assert code == 0
        rows = [l.split(",") for l in out.read_text().splitlines()[2:]]
        for row in rows:
            assert float(row[1]) == 0.0 and float(row[2]) == 0.0
            assert float(row[3]) != 0.0


class TestDensityGridCsv:
    def test_nodal_zero_column_and_order(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        code, _, _ = run(
            capsys,
            "--out", str(out),
            "density-grid", "--branch", "nodal", "--tau", "0.5",
            "--xmin", "-2", "--xmax", "2", "--nx", "5",
            "--tmin", "0", "--tmax", "1", "--nt", "3",
        )
        assert code == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "x,t,P"
        rows = [tuple(map(float, l.split(","))) for l in lines[1:]]
        assert len(rows) == 15
        # row-major t-then-x: x cycles fastest
        assert [r[0] for r in rows[:5]] == [-2.0, -1.0, 0.0, 1.0, 2.0]
        assert all(r[1] == 0.0 for r in rows[:5])
        for x, t, p in rows:
            if x == 0.0:
                assert p == 0.0

    def test_plot_script_emitted(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        code, _, _ = run(
            capsys,
            "--out", str(out), "--emit-plot-script",
            "density-grid", "--branch", "nonnodal", "--tau", "0.5",
            "--xmin", "-1", "--xmax", "1", "--nx", "3",
            "--tmin", "0", "--tmax", "1", "--nt", "2",
        )
        assert code == 0
        script = (tmp_path / "grid.csv.gp").read_text()
        assert "splot 'grid.csv'" in script
        assert "pm3d" in script

    def test_epsilon_flag_changes_values(self, tmp_path, capsys):
        vals = {}
        for eps in ("0.3", "0.15"):
            out = tmp_path / f"g{eps}.csv"
            code, _, _ = run(
                capsys,
                "--out", str(out),
                "density-grid", "--branch", "nonnodal", "--tau", "0.5",
                "--xmin", "0", "--xmax", "1", "--nx", "2",
                "--tmin", "0", "--tmax", "1", "--nt", "2",
                "--epsilon", eps,
            )
            assert code == 0
            lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
            vals[eps] = [float(l.split(",")[2]) for l in lines[1:]]
        assert vals["0.3"] != vals["0.15"]


class TestToaDist:
    def test_json_report(self, tmp_path, capsys):
        out = tmp_path / "dist.json"
        code, _, _ = run(
            capsys,
            "--out", str(out), "--format", "json",
            "toa-dist", "--p0", "3", "--x0", "-7", "--n-tau", "101",
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["t_ph"] == 7.0
        assert payload["t_class"] == pytest.approx(7.0 * math.sqrt(10.0) / 3.0)
        assert payload["tau_mp"] > 7.0
        assert payload["grid"]["n_tau"] == 101
        assert "config" in payload
        assert len(payload["pi_total"]) == 101

    def test_csv_and_photon_marker_script(self, tmp_path, capsys):
        out = tmp_path / "dist.csv"
        code, _, _ = run(
            capsys,
            "--out", str(out), "--emit-plot-script",
            "toa-dist", "--p0", "3", "--x0", "-7", "--n-tau", "51",
            "--tau-min", "5", "--tau-max", "11", "--epsilon-free",
        )
        assert code == 0
        lines = out.read_text().splitlines()
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "tau,pi_total,pi_nonnodal,pi_nodal"
        script = (tmp_path / "dist.csv.gp").read_text()
        assert "set arrow from 7.0" in script
        assert "dashtype 3" in script


class TestLimits:
    def test_report(self, tmp_path, capsys):
        out = tmp_path / "lim.json"
        code, _, _ = run(capsys, "--out", str(out), "limits")
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["decreasing"] is True
        assert payload["t11_scales_as_inverse_c2"] is True
        assert payload["tm11_equals_minus_m0"] is True
        devs = payload["eigenfunction_deviation"]
        assert devs[0] > devs[1] > devs[2]


class TestConfigHandling:
    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"m0": 2.0, "format": "json"}))
        out = tmp_path / "d.json"
        code, _, err = run(
            capsys,
            "--config", str(cfg), "--out", str(out),
            "toa-dist", "--p0", "3", "--x0", "-7", "--n-tau", "21",
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["config"]["m0"] == 2.0  # from file
        # photon time unchanged, classical time picks up the mass
        assert payload["t_class"] == pytest.approx(7.0 * math.sqrt(9.0 + 4.0) / 3.0)

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nonsense": 1}))
        code, _, err = run(capsys, "--config", str(cfg), "verify-algebra")
        assert code == 1
        assert "unknown config keys" in err

    def test_byte_identical_reruns(self, tmp_path, capsys):
        out = tmp_path / "e.csv"
        argv = [
            "--out", str(out),
            "eigenfunction", "--tau", "0.7", "--pmin", "-3", "--pmax", "3", "--n", "64",
        ]
        assert dispatch(argv) == 0
        first = out.read_bytes()
        assert dispatch(argv) == 0
        assert out.read_bytes() == first
        capsys.readouterr()


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            dispatch(["frobnicate"])
        assert exc.value.code == 1

    def test_validation_failure(self, capsys):
        code, _, err = run(
            capsys, "eigenfunction", "--tau", "0.5", "--pmin", "3", "--pmax", "1"
        )
        assert code == 1
        assert "error" in err

    def test_bad_constants(self, capsys):
        code, _, _ = run(capsys, "--m0", "-2", "verify-algebra")
        assert code == 1
