"""CLI contract: config validation, exit codes, determinism, reports."""

import json

import numpy as np
import pytest

from mtwkit.cli import list_catalog, load_config, main, run_campaign
from mtwkit.errors import ConfigError
from mtwkit.report import VerificationReport, dump_csv


def _config(**overrides):
    doc = {
        "seed": 42,
        "cost": {"id": "quadratic", "dim": 2},
        "omega": {"kind": "box", "low": [-1, -1], "high": [1, 1]},
        "lambda": {"kind": "box", "low": [-2, -2], "high": [2, 2]},
        "checks": [{"check": "curvature_scan", "n_points": 16, "n_frames": 2}],
    }
    doc.update(overrides)
    return doc


def _write(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_quadratic_campaign_exit_zero(tmp_path):
    doc = _config(checks=[
        {"check": "curvature_scan", "n_points": 16, "n_frames": 2},
        {"check": "dasm", "n_configs": 2, "n_x": 16, "n_theta": 41},
        {"check": "csis", "n_potentials": 2, "z_per_axis": 9, "n_x": 4},
    ])
    code = main(["verify", "--config", str(_write(tmp_path, doc)),
                 "--out-dir", str(tmp_path / "out")])
    assert code == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert [c["verdict"] for c in rep["checks"]] == ["pass"] * 3
    assert (tmp_path / "out" / "00_curvature_scan.csv").exists()


def test_violation_exits_one(tmp_path):
    doc = _config(cost={"id": "power", "dim": 2, "params": {"p": 4.0}})
    code = main(["curvature-scan", "--config", str(_write(tmp_path, doc)),
                 "--out-dir", str(tmp_path / "out")])
    assert code == 1
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["checks"][0]["verdict"] == "violated"
    assert rep["checks"][0]["witnesses"]


def test_missing_seed_exits_two(tmp_path, capsys):
    doc = _config()
    del doc["seed"]
    code = main(["verify", "--config", str(_write(tmp_path, doc)),
                 "--out-dir", str(tmp_path / "out")])
    assert code == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, _config(extra=1)))
    assert err.value.field == ".extra"
    doc = _config(checks=[{"check": "dasm", "bogus": 1}])
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, doc))
    assert err.value.field == "checks[0].bogus"
    doc = _config(checks=[{"check": "unheard_of"}])
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, doc))
    assert err.value.field == "checks[0].check"


def test_malformed_json_exits_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["verify", "--config", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_seed_override_changes_samples(tmp_path):
    doc = _config(checks=[{"check": "dasm", "n_configs": 2, "n_x": 8, "n_theta": 21}])
    path = _write(tmp_path, doc)
    main(["dasm", "--config", str(path), "--out-dir", str(tmp_path / "a")])
    main(["dasm", "--config", str(path), "--seed", "7", "--out-dir", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert a["seed"] != b["seed"]


def test_same_seed_byte_identical_reports(tmp_path):
    doc = _config(checks=[
        {"check": "curvature_scan", "n_points": 16, "n_frames": 2},
        {"check": "identity", "n_configs": 2},
    ])
    run_campaign(doc, tmp_path / "a")
    run_campaign(doc, tmp_path / "b")

    def strip(path):
        d = json.loads(path.read_text())
        for c in d["checks"]:
            c["wall_time"] = 0.0
        return d

    assert strip(tmp_path / "a" / "report.json") == strip(tmp_path / "b" / "report.json")
    assert (tmp_path / "a" / "00_curvature_scan.csv").read_bytes() == \
        (tmp_path / "b" / "00_curvature_scan.csv").read_bytes()


def test_single_check_filter_requires_presence(tmp_path):
    doc = _config()
    with pytest.raises(ConfigError):
        run_campaign(doc, tmp_path, only="csis")


def test_catalog_listing(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.strip().splitlines() if ln.strip()]
    assert len(lines) == 8  # header + 7 catalog rows
    assert "log" in out and "sphere_dist_sq" in out


def test_report_round_trip_and_csv(tmp_path):
    rep = VerificationReport("demo", "pass", 3, 1, -0.5,
                             witnesses=[{"x": [0.0]}], details={"k": 2}, seed=9)
    assert VerificationReport.from_dict(rep.to_dict()) == rep
    path = tmp_path / "rows.csv"
    dump_csv([(0, 0.1), (1, np.pi)], ["i", "v"], path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# mtwkit-csv-v")
    assert lines[1] == "i,v"
    assert float(lines[3].split(",")[1]) == np.pi
