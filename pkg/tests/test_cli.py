import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from drudespec import checks, cut_curves
from drudespec.checks import CheckResult
from drudespec.cli import main, parse_config

# small grids so each scenario runs in about a second
FAST = {
    "grids": {
        "x": {"L": 10.0, "n": 200},
        "lambda": {"min": 0.0, "max": 4.0, "count": 21, "nodes": 10},
        "k": {"min": 0.0, "max": 3.0, "count": 13},
    },
    "params": {"times": [0.0, 1.0], "t_max": 5.0, "t_count": 6},
}


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def fast(tmp_path):
    return write_config(tmp_path / "fast.json", FAST)


@pytest.mark.parametrize(
    "scenario, files",
    [
        ("dispersion", ["dispersion.csv", "dispersion_summary.json"]),
        ("zones", ["zones.csv", "zones_summary.json"]),
        ("mode", ["mode.csv", "mode_summary.json"]),
        ("green", ["green.csv", "green_summary.json"]),
        ("transform", ["transform.csv", "transform_summary.json"]),
        ("evolve", ["evolve_norms.csv", "evolve_snapshots.csv", "evolve_summary.json"]),
        ("resonance", ["resonance.csv", "resonance_summary.json"]),
    ],
)
def test_scenarios_write_outputs(tmp_path, fast, scenario, files):
    out = tmp_path / "out"
    assert main([scenario, "--config", str(fast), "--out", str(out)]) == 0
    for name in files:
        assert (out / name).stat().st_size > 0


def test_dispersion_table(tmp_path, fast):
    main(["dispersion", "--config", str(fast), "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "dispersion.csv")
    summary = json.loads((tmp_path / "dispersion_summary.json").read_text())
    cc = cut_curves(parse_config({}, "dispersion").medium)
    assert summary["kc"] == pytest.approx(cc.kc)
    for r in rows:
        k = float(r["k"])
        assert float(r["lambdaI"]) == pytest.approx(float(cc.lambdaI(k)), rel=1e-15)
        assert math.isnan(float(r["lambdaE"])) == (k < cc.kc)


def test_zones_respect_critical_wavenumber(tmp_path, fast):
    main(["zones", "--config", str(fast), "--out", str(tmp_path)])
    kc = json.loads((tmp_path / "zones_summary.json").read_text())["kc"]
    for r in read_csv(tmp_path / "zones.csv"):
        k = float(r["k"])
        if r["zone"] == "DI":
            assert k < kc
        if r["zone"] == "EE":
            assert k > kc


def test_transform_summary_round_trip(tmp_path, fast):
    main(["transform", "--config", str(fast), "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "transform_summary.json").read_text())
    assert summary["norm_coeffs"] == pytest.approx(summary["norm_pu"], rel=1e-2)


def test_evolve_is_deterministic(tmp_path, fast):
    for name in ("a", "b"):
        main(["evolve", "--config", str(fast), "--out", str(tmp_path / name), "--seed", "3"])
    for f in ("evolve_norms.csv", "evolve_snapshots.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_changes_the_field(tmp_path):
    doc = dict(FAST, params={**FAST["params"], "field_index": 1})
    cfg = write_config(tmp_path / "c.json", doc)
    norms = []
    for seed in ("0", "1"):
        main(["transform", "--config", str(cfg), "--out", str(tmp_path / seed), "--seed", seed])
        norms.append(json.loads((tmp_path / seed / "transform_summary.json").read_text())["norm_u"])
    assert norms[0] != norms[1]


def test_json_output_format(tmp_path):
    cfg = write_config(tmp_path / "c.json", {**FAST, "output": {"format": "json"}})
    assert main(["dispersion", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "dispersion.json").read_text())
    assert len(rows) == FAST["grids"]["k"]["count"]


def test_toml_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('scenario = "mode"\n[medium]\nomega_m = 1.5\n[params]\nk = 0.5\nlam = 3.0\nj = -1\n')
    assert main(["mode", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "mode_summary.json").read_text())
    assert summary["zone"].startswith("DD")


def test_flat_medium_keys(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"omega_e": 2.0, "omega_m": 0.5})
    medium = parse_config(json.loads(cfg.read_text()), "dispersion").medium
    assert (medium.omega_e, medium.omega_m) == (2.0, 0.5)


@pytest.mark.parametrize(
    "doc, message",
    [
        ({"omega_e": -1.0}, "omega_e must be positive"),
        ({"medium": {"omega_e": 0.0}}, "omega_e must be positive"),
        ({"medium": {"mu0": -2}}, "mu0 must be positive"),
        ({"bogus": 1}, "unknown key 'bogus'"),
        ({"params": {"k": "one"}}, "'params.k' must be a number"),
        ({"omega_e": 1.0, "medium": {"omega_e": 2.0}}, "given both"),
        ({"grids": {"x": {"n": 4}}}, "grids.x"),
        ({"output": {"format": "xml"}}, "output.format"),
        ({"scenario": "zones"}, "does not match"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, doc, message):
    cfg = write_config(tmp_path / "bad.json", doc)
    assert main(["dispersion", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert message in capsys.readouterr().err


def test_malformed_file(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["dispersion", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["dispersion", "--config", str(tmp_path / "nope.json")]) == 2


def test_domain_error_exits_2(tmp_path, capsys):
    # lam = Omega_m is excluded from the mode family
    cfg = write_config(tmp_path / "c.json", {"params": {"k": 1.0, "lam": 1.2}})
    assert main(["mode", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_threads(tmp_path):
    assert main(["dispersion", "--threads", "0", "--out", str(tmp_path)]) == 2


def test_unknown_scenario_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_validate_subset(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"params": {"checks": [1, 2]}})
    assert main(["validate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)
    report = json.loads((tmp_path / "validate_report.json").read_text())
    assert report["all_passed"] and [c["criterion"] for c in report["checks"]] == [1, 2]


def test_validate_failure_exits_1(tmp_path, monkeypatch):
    bad = CheckResult(1, "forced", {"err": 1.0}, {"err": 0.0})
    monkeypatch.setattr(checks, "run_all", lambda seed, only: [bad])
    assert main(["validate", "--out", str(tmp_path)]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "drudespec", "dispersion", "--out", str(tmp_path)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert np.isfinite(json.loads((tmp_path / "dispersion_summary.json").read_text())["kc"])
