import json
import shutil
from pathlib import Path

import pytest

from evflex.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from evflex.lp import read_lp
from evflex.scenario import REPORT_TABLES
from evflex.trips import load_trip_library


def write(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj))
    return path


def test_synth_trips(tmp_path, capsys):
    out = tmp_path / "trips.csv"
    assert main(["synth-trips", "--out", str(out), "--seed", "3"]) == EXIT_OK
    assert len(load_trip_library(out)) > 0
    assert "wrote" in capsys.readouterr().out


def test_synth_trips_bad_config(tmp_path):
    cfg = write(tmp_path / "c.json", {"bogus": 1})
    assert main(["synth-trips", "--out", str(tmp_path / "t.csv"), "--config", str(cfg)]) == EXIT_CONFIG


def test_build_fleet(tmp_path, capsys):
    cfg = write(tmp_path / "f.json", {"area": "DK", "kind": "BEV", "year": 2030, "sample_size": 30, "seed": 1})
    out, hist = tmp_path / "p.csv", tmp_path / "h.csv"
    assert main(["build-fleet", "--config", str(cfg), "--out", str(out), "--histogram", str(hist)]) == EXIT_OK
    assert len([l for l in out.read_text().splitlines() if not l.startswith("#")]) == 8761
    assert hist.read_text().startswith("bin")
    assert "aggregation error" in capsys.readouterr().out


def test_build_fleet_config_errors(tmp_path):
    cfg = write(tmp_path / "f.json", {"area": "DK", "kind": "BEV"})
    assert main(["build-fleet", "--config", str(cfg), "--out", str(tmp_path / "p.csv")]) == EXIT_CONFIG
    cfg = write(tmp_path / "g.json", {"area": "XX", "kind": "BEV", "year": 2030})
    assert main(["build-fleet", "--config", str(cfg), "--out", str(tmp_path / "p.csv")]) == EXIT_CONFIG
    assert main(["build-fleet", "--config", str(tmp_path / "missing.json"), "--out", "x"]) == EXIT_CONFIG


def test_run_compare_report(tmp_path, tiny_config, capsys):
    spec = write(tmp_path / "spec.json", {"matrix": True, "system_config": tiny_config, "seed": 3, "years": [2020]})
    res, lps, rep = tmp_path / "res", tmp_path / "lps", tmp_path / "rep"
    assert main(["run-scenario", "--spec", str(spec), "--out", str(res), "--dump-lp", str(lps)]) == EXIT_OK
    assert len(list(res.iterdir())) == 6
    dumped = sorted(lps.iterdir())
    assert len(dumped) == 6 and read_lp(dumped[0]).num_vars > 0
    delta = tmp_path / "d.csv"
    assert main(["compare", "--base", str(res / "PC_noTransEx"), "--other", str(res / "SC_noTransEx"),
                 "--out", str(delta)]) == EXIT_OK
    assert delta.read_text().startswith("metric,item,year,delta")
    assert main(["report", "--in", str(res), "--out", str(rep)]) == EXIT_OK
    names = {p.name for p in rep.iterdir()}
    assert set(REPORT_TABLES) | {"summary.json"} <= names
    assert len([n for n in names if n.startswith("delta_")]) == 4
    capsys.readouterr()


def test_compare_year_mismatch(tmp_path, tiny_config):
    for years, name in (([2020], "a"), ([2020, 2030], "b")):
        spec = write(tmp_path / f"{name}.json", {"scheme": "PC", "system_config": tiny_config, "years": years})
        assert main(["run-scenario", "--spec", str(spec), "--out", str(tmp_path / name)]) == EXIT_OK
    assert main(["compare", "--base", str(tmp_path / "a" / "PC_noTransEx"),
                 "--other", str(tmp_path / "b" / "PC_noTransEx")]) == EXIT_CONFIG


def test_bad_spec_exit_code(tmp_path, capsys):
    spec = write(tmp_path / "spec.json", {"scheme": "PC", "unknown_key": 1})
    assert main(["run-scenario", "--spec", str(spec), "--out", str(tmp_path / "r")]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert main(["report", "--in", str(tmp_path / "nothing"), "--out", str(tmp_path / "r")]) == EXIT_CONFIG


def test_infeasible_exit_code(tmp_path, tiny_config, capsys):
    d = tmp_path / "sys"
    shutil.copytree(Path(tiny_config).parent, d)
    raw = json.loads((d / "system.json").read_text())
    for tech in raw["technologies"].values():
        tech["investable"] = False
    raw["demand_scale"]["2020"] = 10.0
    write(d / "system.json", raw)
    spec = write(tmp_path / "spec.json", {"scheme": "PC", "system_config": str(d / "system.json"), "years": [2020]})
    assert main(["run-scenario", "--spec", str(spec), "--out", str(tmp_path / "r")]) == EXIT_INFEASIBLE
    report = json.loads(capsys.readouterr().err)
    assert report["region"] in raw["regions"] and "hour" in report


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["fly"])
