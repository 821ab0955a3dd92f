"""End-to-end checks of the ``fracvar`` command-line driver."""

import json
import os
from pathlib import Path

import pytest

from fracvar import cli

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
SHIPPED = sorted(CONFIG_DIR.glob("*.json"))


def load_payload(name):
    return json.loads((CONFIG_DIR / name).read_text(encoding="utf-8"))


def write_payload(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def outputs(out_dir, payload):
    csv_path = Path(out_dir) / payload["output_path"]
    return csv_path, csv_path.with_suffix(".summary.json")


@pytest.mark.parametrize("config", SHIPPED, ids=lambda p: p.stem)
def test_shipped_configs_pass(config, tmp_path):
    assert cli.run(str(config), output_dir=str(tmp_path)) == 0
    payload = json.loads(config.read_text(encoding="utf-8"))
    csv_path, summary_path = outputs(tmp_path, payload)
    assert csv_path.is_file()
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert summary["pass"] is True
    assert summary["command"] == payload["command"]
    assert summary["rows"] >= 1


def test_there_are_shipped_configs():
    assert len(SHIPPED) >= 5


def test_tolerance_failure_exits_2(tmp_path, capsys):
    payload = load_payload("op_apply_halfint.json")
    payload["tolerances"] = {"abs_error_max": 1e-30}
    code = cli.run(write_payload(tmp_path, payload), output_dir=str(tmp_path))
    assert code == 2
    _, summary_path = outputs(tmp_path, payload)
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert summary["pass"] is False
    entry = summary["tolerances"]["abs_error_max"]
    assert set(entry) == {"bound", "value", "pass"}
    assert entry["pass"] is False
    assert "FAIL" in capsys.readouterr().out


def test_config_error_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"command": "nope"}', encoding="utf-8")
    assert cli.run(str(path), output_dir=str(tmp_path)) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_config_exits_1(tmp_path, capsys):
    assert cli.run(str(tmp_path / "absent.json")) == 1
    assert "error:" in capsys.readouterr().err


def test_csv_is_deterministic(tmp_path):
    payload = load_payload("op_apply_halfint.json")
    cfg = write_payload(tmp_path, payload)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.run(cfg, output_dir=str(out1)) == 0
    assert cli.run(cfg, output_dir=str(out2)) == 0
    csv1, _ = outputs(out1, payload)
    csv2, _ = outputs(out2, payload)
    assert csv1.read_bytes() == csv2.read_bytes()


def test_csv_format(tmp_path):
    payload = load_payload("op_apply_halfint.json")
    assert cli.run(write_payload(tmp_path, payload),
                   output_dir=str(tmp_path)) == 0
    csv_path, _ = outputs(tmp_path, payload)
    text = csv_path.read_text(encoding="utf-8")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0].split(",")[:2] == ["t1", "value"]
    assert len(lines) > 1
    # Cells round-trip as floats.
    for cell in lines[1].split(","):
        float(cell)


def test_order_est_column(tmp_path):
    payload = load_payload("convergence_K_quadratic.json")
    assert cli.run(write_payload(tmp_path, payload),
                   output_dir=str(tmp_path)) == 0
    csv_path, _ = outputs(tmp_path, payload)
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    assert header[-1] == "order_est"
    assert len(lines) - 1 == len(payload["sweep"])
    first = lines[1].split(",")[-1]
    assert first == "nan"
    last = float(lines[-1].split(",")[-1])
    assert 1.0 < last < 3.0


def test_parallel_jobs_identical(tmp_path):
    payload = load_payload("noether_translation.json")
    cfg = write_payload(tmp_path, payload)
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    assert cli.run(cfg, output_dir=str(serial), jobs=1) == 0
    assert cli.run(cfg, output_dir=str(parallel), jobs=4) == 0
    csv_s, _ = outputs(serial, payload)
    csv_p, _ = outputs(parallel, payload)
    assert csv_s.read_bytes() == csv_p.read_bytes()


def test_output_dir_resolution(tmp_path, monkeypatch):
    payload = load_payload("op_apply_halfint.json")
    cfg = write_payload(tmp_path, payload)
    env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"

    monkeypatch.setenv("FRACVAR_OUTPUT_DIR", str(env_dir))
    assert cli.run(cfg) == 0
    assert outputs(env_dir, payload)[0].is_file()

    assert cli.run(cfg, output_dir=str(flag_dir)) == 0
    assert outputs(flag_dir, payload)[0].is_file()

    monkeypatch.delenv("FRACVAR_OUTPUT_DIR")
    assert cli.run(cfg) == 0
    assert outputs(tmp_path, payload)[0].is_file()


def test_output_path_may_contain_subdirectory(tmp_path):
    payload = load_payload("op_apply_halfint.json")
    payload["output_path"] = "results/op.csv"
    assert cli.run(write_payload(tmp_path, payload),
                   output_dir=str(tmp_path)) == 0
    assert (tmp_path / "results" / "op.csv").is_file()


def test_main_parses_arguments(tmp_path):
    payload = load_payload("op_apply_halfint.json")
    cfg = write_payload(tmp_path, payload)
    assert cli.main([cfg, "--output-dir", str(tmp_path), "--jobs", "2"]) == 0
    with pytest.raises(SystemExit):
        cli.main([cfg, "--jobs", "0"])


def test_summary_reports_absolute_paths(tmp_path):
    payload = load_payload("op_apply_halfint.json")
    cfg = write_payload(tmp_path, payload)
    assert cli.run(cfg, output_dir=str(tmp_path)) == 0
    _, summary_path = outputs(tmp_path, payload)
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert os.path.isabs(summary["config"])
    assert os.path.isabs(summary["csv"])
    assert set(summary) == {"command", "config", "csv", "rows",
                            "tolerances", "pass"}
