import json
import subprocess
import sys

import pytest

from polyball import io as pio
from polyball.cli import (EXIT_CHECK, EXIT_OK, EXIT_PARAMS, EXIT_SOLVER, EXIT_PROVEN,
                          EXIT_TIMEOUT, main)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_json(capsys):
    code, out, _ = run(["eval", "--nu", "0.25", "--gamma", "2", "--beta", "2", "--delta", "1",
                        "--eta", "1", "--json"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["p_rad"] == 0.0 and d["a"] == pytest.approx(1.8)


def test_eval_text(capsys):
    code, out, _ = run(["eval", "--delta", "0.5", "--eta", "1"], capsys)
    assert code == EXIT_OK and out.startswith("p_rad")


def test_inadmissible_message(capsys):
    code, _, err = run(["eval", "--nu", "0.25", "--gamma", "1", "--beta", "2"], capsys)
    assert code == EXIT_PARAMS
    assert "3 gamma (1-nu)/(1+nu)" in err and "1.8" in err


def test_bad_values(capsys):
    assert run(["eval", "--nu", "0.7"], capsys)[0] == EXIT_PARAMS
    assert run(["eval", "--beta", "0"], capsys)[0] == EXIT_PARAMS
    assert run(["eval", "--delta", "-1"], capsys)[0] == EXIT_PARAMS
    assert run(["homologous", "--alpha", "0"], capsys)[0] == EXIT_PARAMS


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nu": 0.5, "gamma": 2.0, "beta": 2.0, "delta": 2.0, "eta": 2.0}))
    code, out, _ = run(["eval", "--config", str(cfg), "--json", "--delta", "1", "--eta", "1"],
                       capsys)
    assert code == EXIT_OK
    assert json.loads(out)["a"] == pytest.approx(1.0)
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(["eval", "--config", str(bad)], capsys)[0] == EXIT_PARAMS
    assert run(["eval", "--config", str(tmp_path / "missing.json")], capsys)[0] == EXIT_PARAMS


def test_check(capsys):
    code, out, _ = run(["check", "--nu", "0.25", "--gamma", "2", "--beta", "2"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["all_pass"] is True


def test_static_outputs(tmp_path, capsys):
    code, out, _ = run(["static", "--nu", "0.5", "--gamma", "2", "--beta", "2", "--out",
                        str(tmp_path), "--prefix", "fl", "--lagrange"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["type"] == "A"
    header, rows = pio.read_csv(tmp_path / "fl.csv")
    assert header[:3] == ["r", "delta", "eta"] and len(rows) > 10
    side = json.loads((tmp_path / "fl.json").read_text())
    assert side["R"] == pytest.approx(1.8137993642342178, rel=1e-8)
    man = json.loads((tmp_path / "fl.manifest.json").read_text())
    assert man["command"] == "static" and "python" in man["build"]
    assert not (tmp_path / "fl_lagrange.csv").exists()  # delta vanishes at the boundary
    code, _, _ = run(["static", "--nu", "0.25", "--gamma", "1.5", "--beta", "1.2", "--out",
                      str(tmp_path), "--prefix", "s", "--lagrange"], capsys)
    assert code == EXIT_OK and (tmp_path / "s_lagrange.csv").exists()


def test_static_solver_failure(tmp_path, capsys, monkeypatch):
    from polyball import static_ball

    def boom(*a, **k):
        raise static_ball.SolverError("step underflow at r=1")

    monkeypatch.setattr(static_ball, "integrate_static", boom)
    code, _, err = run(["static", "--out", str(tmp_path)], capsys)
    assert code == EXIT_SOLVER and "r=1" in err


def test_homologous(tmp_path, capsys):
    code, out, _ = run(["homologous", "--nu", "0.25", "--alpha", "-0.2", "--delta0-c", "4",
                        "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["Z"] > 0 and d["T"] > 0
    assert (tmp_path / "homologous_omega.csv").exists()
    code, out, _ = run(["homologous", "--nu", "0.25", "--alpha", "-0.2", "--threshold",
                        "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["delta_star"] == pytest.approx(2.447, rel=2e-3)


def test_phase(tmp_path, capsys):
    code, out, _ = run(["phase", "--nu", "0.25", "--gamma", "1", "--beta", "0.5", "--xi-end",
                        "30", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["distance_to_P"] < 1e-6
    fps = json.loads((tmp_path / "phase_fixed_points.json").read_text())
    assert [f["name"] for f in fps] == ["O", "Q", "P"]


def test_scan_static(tmp_path, capsys):
    code, out, _ = run(["scan", "static", "--nu", "0.25", "--nx", "6", "--ny", "5", "--out",
                        str(tmp_path), "--ppm"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["violations"] == 0
    assert (tmp_path / "scan_static.ppm").read_bytes().startswith(b"P6")
    man = json.loads((tmp_path / "scan_static.manifest.json").read_text())
    assert man["grid"]["nx"] == 6


def test_scan_timeout_exit(tmp_path, capsys):
    code, _, _ = run(["scan", "static", "--nu", "0.25", "--nx", "3", "--ny", "3", "--timeout",
                      "1e-9", "--out", str(tmp_path)], capsys)
    assert code == EXIT_TIMEOUT


def test_scan_proven_set_exit(tmp_path, capsys, monkeypatch):
    from polyball import atlas

    real = atlas.proven_set_violations
    monkeypatch.setattr(atlas, "proven_set_violations",
                        lambda reg, nu: real(reg, nu) + [{"gamma": 0, "beta": 0}])
    code, _, _ = run(["scan", "static", "--nu", "0.25", "--nx", "3", "--ny", "3", "--out",
                      str(tmp_path)], capsys)
    assert code == EXIT_PROVEN


def test_scan_other(tmp_path, capsys):
    code, out, _ = run(["scan", "gammastar", "--nu-range", "-0.5", "0.3", "--n", "3", "--out",
                        str(tmp_path)], capsys)
    assert code == EXIT_OK and json.loads(out)["nondecreasing"] is True
    code, out, _ = run(["scan", "homologous", "--alpha-range", "-0.5", "-0.1", "--n", "2",
                        "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK and json.loads(out)["ordering_failures"] == []
    code, out, _ = run(["scan", "raster", "--nx", "10", "--ny", "10", "--out", str(tmp_path)],
                       capsys)
    assert code == EXIT_OK
    assert sum(json.loads(out)["counts"].values()) == 100


def test_check_failure_exit(capsys, monkeypatch):
    from polyball import constitutive

    monkeypatch.setattr(constitutive, "cbs_spread", lambda mat, eta: 1.0)
    assert run(["check"], capsys)[0] == EXIT_CHECK


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "polyball", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.startswith("polyball")
