import csv
import json
import math

import pytest

from planarcycles.cli import main, resolve_config
from planarcycles.errors import ConfigError

HARMONIC = {"P": [[0, 1, -1.0]], "Q": [[1, 0, 1.0]]}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _last_row(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows[-1]


def test_integrate_harmonic_closes(tmp_path):
    cfg = _write(tmp_path / "c.json", {"system": HARMONIC,
                                       "integrate": {"init": [0.0, 1.0], "t_end": 2 * math.pi}})
    out = tmp_path / "out"
    assert main(["integrate", "--config", cfg, "--out", str(out)]) == 0
    last = _last_row(out / "trajectory.csv")
    assert float(last["t"]) == pytest.approx(2 * math.pi, abs=1e-12)
    assert abs(float(last["x"])) < 1e-8
    assert abs(float(last["y"]) - 1.0) < 1e-8
    assert (out / "config.json").exists()


def test_integrate_slow_fast_runs_to_time_limit(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"system": {"kind": "eq3", "params": {"a": 0.5, "eps": 0.1}},
                                       "integrate": {"init": [0.5, 0.2], "t_end": 300.0}})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert "TimeLimit" in capsys.readouterr().out


def test_malformed_json_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["integrate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_unknown_key_exit_code(tmp_path):
    cfg = _write(tmp_path / "c.json", {"system": HARMONIC, "integrate": {"bogus": 1}})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    with pytest.raises(ConfigError):
        resolve_config({"nonsense": {}}, "integrate")


def test_phi_rejects_same_sign_grid(tmp_path):
    cfg = _write(tmp_path / "c.json", {"phi": {"b_grid": [1.0], "c_grid": [1.0]}})
    assert main(["phi", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_system_is_config_error(tmp_path):
    assert main(["retmap", "--out", str(tmp_path / "o")]) == 2


def test_cycles_van_der_pol_like(tmp_path):
    cfg = _write(tmp_path / "c.json", {"system": {"kind": "eq2", "params": {"a": 0, "b": 1, "c": -1}},
                                       "cycles": {"y_range": [0.1, 4.0], "n": 40}})
    out = tmp_path / "out"
    assert main(["cycles", "--config", cfg, "--out", str(out)]) == 0
    data = json.loads((out / "cycles.json").read_text())
    assert len(data) == 1
    assert data[0]["y0"] == pytest.approx(1.2544168353, rel=1e-8)
    assert (out / "cycle_0.csv").exists()


def test_verify_prop3_small_list(tmp_path):
    cfg = _write(tmp_path / "c.json", {"verify": {"prop3": {"a_list": [0.0, 0.5, -0.5, 1.2, -1.2]}}})
    out = tmp_path / "out"
    assert main(["verify", "prop3", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["checks"]
    assert (out / "summary.txt").read_text().strip()


def test_echoed_config_reproduces_bytes(tmp_path):
    cfg = _write(tmp_path / "c.json", {"system": {"kind": "eq2", "params": {"a": 0, "b": 1, "c": -1}},
                                       "retmap": {"y_range": [0.2, 1.2], "n": 8}})
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["retmap", "--config", cfg, "--out", str(first)]) == 0
    assert main(["retmap", "--config", str(first / "config.json"), "--out", str(second)]) == 0
    for name in ("config.json", "retmap.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_seed_flag_overrides_config():
    cfg = resolve_config({}, "verify", "prop1", seed=7)
    assert cfg["verify"]["prop1"]["seed"] == 7
