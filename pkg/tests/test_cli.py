import csv
import json

import numpy as np
import pytest

from onionqrc.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_synth(tmp_path, capsys):
    code, out, _ = run(["synth", "--seed", "4", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "synth.csv").read_text().splitlines()
    assert lines[0] == "zone,sample,day,pitting,tarnishing,humidity,temperature"
    assert len(lines) == 1 + 4 * 12 * 14


def test_spectrum_prefactors(tmp_path, capsys):
    code, out, _ = run(["spectrum", "--qubits", "4", "--depth", "2", "--measured", "1",
                        "--prefactors", "0.5,1,2,4", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "spectrum.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4 * 256
    assert sorted({r["parameter_value"] for r in rows}) == ["0.5", "1.0", "2.0", "4.0"]
    meta = json.loads((tmp_path / "spectrum.json").read_text())
    assert meta["n_qubits"] == 4 and len(meta["angles"]) == 8
    assert "prefactor=4.0" in out


def test_spectrum_measurement_sweep(tmp_path, capsys):
    code, _, _ = run(["spectrum", "--qubits", "3", "--measured-sweep", "0,1,2",
                      "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    meta = json.loads((tmp_path / "spectrum.json").read_text())
    assert meta["values"] == [[], [0], [0, 1]]
    assert meta["mean_nontrivial_modulus"][0] == pytest.approx(1.0)


def test_train_evaluate_roundtrip(tmp_path, capsys):
    cfg = {"kind": "oqrc", "qrc": {"layers": [{"n_qubits": 3, "b": 0.1}]}, "data_seed": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert run(["synth", "--seed", "2", "--out-dir", str(tmp_path)], capsys)[0] == 0
    assert run(["train", "--config", str(tmp_path / "cfg.json"),
                "--data", str(tmp_path / "synth.csv"), "--out-dir", str(tmp_path)], capsys)[0] == 0
    results = []
    for k in range(2):
        code, out, _ = run(["evaluate", "--model", str(tmp_path / "model.json"),
                            "--data", str(tmp_path / "synth.csv"), "--out-dir", str(tmp_path),
                            "--output", f"r{k}.json"], capsys)
        assert code == 0
        d = json.loads((tmp_path / f"r{k}.json").read_text())
        d.pop("runtime_seconds")
        results.append(d)
    assert results[0] == results[1]
    pred = (tmp_path / "r0_predictions.csv").read_text().splitlines()
    assert pred[0] == "zone,sample,day,true,predicted" and len(pred) == 1 + 80


def test_train_from_flags_on_synthetic(tmp_path, capsys):
    code, _, _ = run(["train", "--model", "crc", "--qubits", "3", "--crc-size", "exponential",
                      "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    model = json.loads((tmp_path / "model.json").read_text())
    assert model["config"]["esn"]["size"] == 8 and model["config"]["data_seed"] == 1


def test_benchmark(tmp_path, capsys):
    code, _, _ = run(["benchmark", "--models", "simple,oqrc1,crc", "--qubits", "2,3",
                      "--seeds", "0", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "benchmark.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    assert {"model", "qubits", "mean_pooled_r2"} <= set(rows[0])


def test_config_defaults_and_override(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"qubits": 3, "prefactors": "1,2"}))
    code, out, _ = run(["spectrum", "--config", str(tmp_path / "c.json"),
                        "--prefactors", "3", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    meta = json.loads((tmp_path / "spectrum.json").read_text())
    assert meta["n_qubits"] == 3 and meta["values"] == [3.0]


def test_unknown_subcommand(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2
    assert "usage:" in err
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "UsageError"


def test_unknown_flag(capsys):
    code, _, err = run(["spectrum", "--bogus"], capsys)
    assert code == 2 and "usage:" in err


def test_runtime_error_single_line(tmp_path, capsys):
    code, _, err = run(["evaluate", "--model", str(tmp_path / "missing.json")], capsys)
    assert code == 1
    lines = err.strip().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["error"] == "FileNotFoundError"


def test_bad_config_key(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"nonsense": 1}))
    code, _, err = run(["synth", "--config", str(tmp_path / "c.json")], capsys)
    assert code == 1 and "unknown config key" in err
