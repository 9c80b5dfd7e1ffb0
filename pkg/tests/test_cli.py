import json

import numpy as np
import pytest

from anyonspectra.cli import main, to_json


def run_cli(args):
    return main(args)


def test_verify_passes(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = run_cli(["verify", "--group", "Z2", "--torus", "2x2",
                    "--lambdas", "0.3,0.7,0.5", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert all(item["pass"] for item in report)
    assert {"check_name", "residual", "pass"} <= set(report[0])
    sidecar = json.loads((tmp_path / "report.json.config.json").read_text())
    assert sidecar["group"] == "Z2"
    assert sidecar["torus"] == "2x2"


def test_bands_row_count(tmp_path):
    out = tmp_path / "bands.csv"
    code = run_cli(["bands", "--group", "Z3", "--chi", "1", "--g", "1",
                    "--grid", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "kx,ky,E1,E2,E3,E4"
    assert len(lines) == 1 + 9
    assert all(len(line.split(",")) == 6 for line in lines[1:])


def test_bands_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run_cli(["bands", "--grid", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fiberspec_meta_sidecar(tmp_path):
    out = tmp_path / "fiber.csv"
    code = run_cli(["fiberspec", "--lambda", "1", "--rho", "1",
                    "--kx", "0", "--ky", "0.7853981633974483",
                    "--window", "8", "--out", str(out)])
    assert code == 0
    meta = json.loads((tmp_path / "fiber.csv.meta.json").read_text())
    assert meta["R"] == pytest.approx(4.0)
    assert len(meta["outliers"]) == 4
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "index,eigenvalue"
    assert len(lines) == 1 + 4 * 8 * 8
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert vals == sorted(vals)


def test_boundstates_payload(tmp_path):
    out = tmp_path / "bs.json"
    code = run_cli(["boundstates", "--lambda", "1", "--rho", "1",
                    "--kx", "0", "--window", "20", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["B"] == pytest.approx(2.0)
    assert payload["gap"] == pytest.approx(1.0)
    assert payload["converged"] is True
    assert payload["analytic_energies"] == pytest.approx([-5, -5, 5, 5])
    assert np.max(np.abs(np.array(payload["numeric_energies"])
                         - np.array([-5, -5, 5, 5]))) < 1e-8


def test_boundstates_ky_line(tmp_path):
    out = tmp_path / "bs.json"
    code = run_cli(["boundstates", "--line", "ky", "--lambda", "1",
                    "--rho", "1", "--ky", "0", "--window", "16",
                    "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["analytic_energies"] == pytest.approx([-5.0, 5.0])
    assert len(payload["numeric_energies"]) == 4
    assert payload["converged"] is True


def test_sweep_structure(tmp_path, monkeypatch):
    monkeypatch.setenv("ANYONSPECTRA_THREADS", "1")
    out = tmp_path / "sweep.csv"
    code = run_cli(["sweep", "--lambda-min", "0.5", "--lambda-max", "1.0",
                    "--steps", "2", "--rho", "1", "--k", "0,0.7853981633974483",
                    "--window", "6", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "lambda,eig_index,energy,is_outlier"
    assert len(lines) == 1 + 2 * 4 * 36
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(0.5)


def test_holonomy_default(capsys):
    assert run_cli(["holonomy"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pass"] is True
    assert payload["winding"] == 1
    assert payload["measured_re"] == pytest.approx(-0.5, abs=1e-12)


def test_holonomy_z4(tmp_path):
    out = tmp_path / "hol.json"
    code = run_cli(["holonomy", "--group", "Z4", "--chi", "1", "--g", "1",
                    "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["measured_im"] == pytest.approx(1.0, abs=1e-12)


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--no-such-flag"])
    assert exc.value.code == 2
    assert run_cli(["verify", "--group", "K7"]) == 2
    assert run_cli(["holonomy", "--base", "x,y"]) == 2


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": 2}))
    out = tmp_path / "bands.csv"
    code = run_cli(["bands", "--grid", "5", "--config", str(cfg),
                    "--out", str(out)])
    assert code == 0
    assert len(out.read_text().strip().split("\n")) == 1 + 4
    assert run_cli(["bands", "--config", str(tmp_path / "nope.json")]) == 2


def test_json_emitter_determinism():
    text = to_json({"b": [1.0, 0.5], "a": {"z": True, "y": None}})
    assert text.index('"a"') < text.index('"b"')
    assert "0.5" in text
    with pytest.raises(ValueError):
        to_json({"x": float("nan")})


def test_tabular_json_format(tmp_path):
    out = tmp_path / "bands.json"
    code = run_cli(["bands", "--grid", "2", "--format", "json",
                    "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 4
    assert set(rows[0]) == {"kx", "ky", "E1", "E2", "E3", "E4"}
