import json
import subprocess
import sys

from blockprop.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "fig8" in out and "fig3a" in out


def test_preset_run(tmp_path):
    assert main(["preset", "fig7", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "aobi_cloud_compute_1e+13.csv").exists()


def test_precedence_flags_over_config_over_preset(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("horizon = 4\np_i = 0.4\nseeds = 3\n")
    out = tmp_path / "o"
    assert main(["preset", "fig5", "--config", str(cfg), "--horizon", "2", "--step", "0.5",
                 "--out", str(out)]) == EXIT_OK
    params = _manifest(out)["spec"]["parameters"]
    assert params["horizon"] == 2.0  # flag beats config
    assert params["p_i"] == 0.4      # config beats preset
    assert params["p_e"] == 0.1      # preset default kept
    assert params["step"] == 0.5


def test_config_replaces_varied_field(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"omega_bar": 0.9, "tau_grid": [1, 2]}))
    out = tmp_path / "o"
    assert main(["preset", "fig8", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert _manifest(out)["files"] == ["aobi.csv"]


def test_flat_config_lists(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tau_grid = 1, 2, 3\nvary = {\"n_miners\": [1000, 2000]}\n")
    out = tmp_path / "o"
    assert main(["aobi-sweep", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert len(_manifest(out)["files"]) == 2


def test_seeds_flag(tmp_path):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps({"n_miners": 100, "epochs": 5, "substeps": 2}))
    out = tmp_path / "o"
    assert main(["abm", "--config", str(cfg), "--seeds", "4,5", "--out", str(out)]) == EXIT_OK
    assert _manifest(out)["spec"]["seeds"] == [4, 5]
    assert (out / "trace_seed5.csv").exists()


def test_validation_failures_exit_one(tmp_path):
    assert main(["preset", "nope", "--out", str(tmp_path)]) == EXIT_INVALID
    assert main(["abm", "--seeds", "a,b"]) == EXIT_INVALID
    assert main(["epidemic", "--config", str(tmp_path / "missing.cfg")]) == EXIT_INVALID
    bad = tmp_path / "bad.cfg"
    bad.write_text("p_f = 3\n")
    assert main(["epidemic", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_INVALID
    assert main(["frobnicate"]) == EXIT_INVALID


def test_runtime_failure_exits_two(tmp_path):
    # a step far too coarse for the dynamics pushes densities out of [0, 1]
    cfg = tmp_path / "blow.json"
    cfg.write_text(json.dumps({"start": [0.5, 0.5, 0, 0, 0], "p_f": 1.0, "p_e": 0.0, "p_i": 1.0,
                               "k_adjacent": 8, "vary": {}}))
    out = tmp_path / "o"
    assert main(["epidemic", "--config", str(cfg), "--step", "2", "--horizon", "20",
                 "--out", str(out)]) == EXIT_RUNTIME


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "blockprop.cli", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "fig12" in res.stdout
