from __future__ import annotations

import json

import numpy as np
import pytest

from dualweno.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, OUT_ENV, main


@pytest.fixture(autouse=True)
def out_root(tmp_path, monkeypatch):
    # keep default output directories out of the working tree
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "default-out"))


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestRun:
    def test_conv1d(self, tmp_path, capsys):
        assert run_cli("run", "--case", "conv1d", "--nx", 40, "--out", tmp_path) == EXIT_OK
        assert "L1_error" in capsys.readouterr().out
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert set(manifest["files"]) == {"config.json", "solution.csv"}
        assert manifest["summary"]["L1_error"] < 1e-3

    def test_blob_snapshot(self, tmp_path):
        assert run_cli("run", "--case", "blob", "--nx", 40, "--nz", 40, "--out", tmp_path) == EXIT_OK
        assert (tmp_path / "phi_final.vtk").is_file()

    def test_emit_config(self, capsys):
        assert run_cli("run", "--case", "conv1d", "--variant", "weno5-loc", "--emit-config") == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["epsilon"] == 1e-6
        assert doc["sizes"] == [10, 20, 40, 80, 160, 320, 640]

    def test_env_out_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_ENV, str(tmp_path))
        assert run_cli("run", "--case", "diff1d", "--nx", 20) == EXIT_OK
        assert (tmp_path / "run-diff1d" / "solution.csv").is_file()

    def test_config_file_and_flags(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"case": "conv1d", "variant": "weno5-js", "sizes": [20]}))
        assert run_cli("run", "--config", cfg, "--epsilon", 0.5, "--emit-config") == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert (doc["variant"], doc["epsilon"]) == ("weno5-js", 0.5)


class TestBuoyancy:
    ARGS = ("--case", "buoyancy", "--nx", 16, "--nz", 16, "--R", 2, "--end-time", 1.0, "--seed", 3)

    def _config(self, tmp_path):
        cfg = tmp_path / "b.json"
        cfg.write_text(json.dumps({"case": "buoyancy", "delta": 0.0, "ri": 5.0,
                                   "disturbance": {"t_inject": 0.25, "amplitude": 0.3},
                                   "output": {"interval": 0.25}}))
        return cfg

    def test_artifacts_and_determinism(self, tmp_path):
        cfg = self._config(tmp_path)
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            assert run_cli("run", "--config", cfg, *self.ARGS, "--profile", "z=4.5", "--out", out) == EXIT_OK
        a = json.loads((outs[0] / "manifest.json").read_text())
        b = json.loads((outs[1] / "manifest.json").read_text())
        assert a["files"] == b["files"]
        for name in ("time_series.csv", "front.csv", "profile_z4.5.csv", "flow_log.csv", "disturbance.npy"):
            assert name in a["files"]
        snaps = sorted((outs[0] / "snapshots").glob("*.vtk"))
        assert len(snaps) == 5
        header = (outs[0] / "time_series.csv").read_text().splitlines()[0]
        assert header.startswith("# nondimensional")

    def test_compare(self, tmp_path):
        cfg = self._config(tmp_path)
        assert run_cli("compare", "--config", cfg, *self.ARGS, "--variants", "central5,weno5-loc",
                       "--profile", "z=4.5", "--no-snapshots", "--out", tmp_path / "c") == EXIT_OK
        lines = (tmp_path / "c" / "compare_z4.5.csv").read_text().splitlines()
        assert lines[2] == "coord,central5,weno5-loc"
        assert len(lines) == 3 + 32

    def test_solver_failure_dumps_state(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"case": "buoyancy", "nx": 8, "nz": 8, "delta": 0.0, "dt_mode": "fixed",
                                   "dt_fixed": 50.0, "end_time": 50000.0,
                                   "output": {"interval": 1000.0, "snapshots": False}}))
        assert run_cli("run", "--config", cfg, "--out", tmp_path / "o") == EXIT_SOLVER
        err = capsys.readouterr().err
        assert "failure_state.npz" in err
        dump = np.load(tmp_path / "o" / "failure_state.npz")
        assert "scalar_T" in dump.files


class TestConvergeAndTables:
    def test_converge_csv(self, tmp_path):
        assert run_cli("converge", "--case", "conv1d", "--variant", "weno5-loc", "--sizes", "10,20,40",
                       "--out", tmp_path) == EXIT_OK
        lines = (tmp_path / "convergence.csv").read_text().splitlines()
        rows = [l for l in lines if not l.startswith("#")]
        assert rows[0] == "N,L1_error,order"
        assert [r.split(",")[0] for r in rows[1:]] == ["10", "20", "40"]

    def test_tables_subset(self, tmp_path):
        assert run_cli("tables", "--only", "table4-delta3", "--out", tmp_path) == EXIT_OK
        assert (tmp_path / "table4-delta3.csv").is_file()


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ("run", "--case", "conv1d", "--delta", -1),
        ("run", "--case", "warp"),
        ("run",),
        ("run", "--case", "blob", "--paper-scale"),
        ("tables", "--only", "table9"),
        ("compare", "--case", "conv1d", "--variants", "weno-z"),
    ])
    def test_config_errors(self, argv, tmp_path, capsys):
        assert run_cli(*argv, *(() if argv[0] == "tables" else ("--out", tmp_path))) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_case_conflict(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"case": "conv1d"}))
        assert run_cli("run", "--config", cfg, "--case", "blob") == EXIT_CONFIG

    def test_unknown_key_in_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"case": "conv1d", "wobble": 1}))
        assert run_cli("run", "--config", cfg) == EXIT_CONFIG
        assert "wobble" in capsys.readouterr().err

    def test_paper_scale_preset(self, capsys):
        assert run_cli("run", "--case", "buoyancy", "--paper-scale", "--emit-config") == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert (doc["nx"], doc["nz"], doc["refine"]) == (400, 256, 3)
