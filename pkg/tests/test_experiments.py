import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qaoa_ising import cli
from qaoa_ising.experiments import (OUT_ENV, ConfigError, fmt, flat_point, load_config, make_config, run,
                                    write_csv)

SMALL = {
    "validate": {"n_sets": "2", "ed_sizes": "4,6", "p_max": "2", "grad_sets": "4", "grad_p_max": "4"},
    "degeneracy": {"p_list": "1,2", "n_starts": "12,20", "n_sites": "20"},
    "bound-scan": {"n_sites": "20,6", "p_max": "5"},
    "regular": {"n_sites": "64", "p_target": "8", "random_starts": "2"},
    "collapse": {"n_sites": "64", "p_max": "16"},
    "field-scan": {"fields": "0,0.5", "p": "8"},
    "compare-schedules": {"n_sites": "32", "taus": "4,8,16", "gap_floor_count": "3", "optimal_p_max": "8"},
}


def _run(tmp_path, experiment, seed=7, sub="a"):
    cfg = make_config(experiment, SMALL[experiment], seed=seed, out_dir=tmp_path / sub)
    return cfg, run(cfg)


def test_fmt_uses_17_significant_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(np.float64(1 / 3)) == "0.33333333333333331"
    assert fmt(3) == "3" and fmt(True) == "true" and fmt("x") == "x"
    with pytest.raises(ValueError):
        fmt(float("nan"))


def test_config_hash_tracks_parameters(tmp_path):
    a = make_config("bound-scan", {"p_max": "4"}, out_dir=tmp_path / "x")
    b = make_config("bound-scan", {"p_max": 4.0}, out_dir=tmp_path / "y", threads=3)
    c = make_config("bound-scan", {"p_max": "5"})
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash
    assert make_config("validate", seed=1).config_hash != make_config("validate", seed=2).config_hash


@pytest.mark.parametrize("experiment,overrides,seed", [
    ("nope", {}, 1),
    ("bound-scan", {"bogus": "1"}, None),
    ("bound-scan", {"p_max": "two"}, None),
    ("bound-scan", {"n_sites": "7"}, None),
    ("degeneracy", {}, None),
    ("degeneracy", {"p_list": "7", "n_starts": "5"}, 1),
    ("degeneracy", {"p_list": "1,2", "n_starts": "5"}, 1),
    ("regular", {"p_target": "24"}, None),
    ("field-scan", {"fields": "1.5"}, None),
    ("validate", {"ed_sizes": "16"}, 1),
    ("compare-schedules", {"taus": "8,16,20.5"}, None),
])
def test_config_errors(experiment, overrides, seed):
    with pytest.raises(ConfigError):
        make_config(experiment, overrides, seed=seed)


def test_ini_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nexperiment = bound-scan\nseed = 3\nout = %s\n\n[bound-scan]\np_max = 4\nn_sites = 10\n"
                   % (tmp_path / "o"))
    cfg = load_config(ini)
    assert cfg.experiment == "bound-scan" and cfg.seed == 3 and cfg.params["p_max"] == 4
    assert cfg.params["n_sites"] == [10]
    cfg = load_config(ini, overrides={"p_max": "6"}, seed=9)
    assert cfg.params["p_max"] == 6 and cfg.seed == 9
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    with pytest.raises(ConfigError):
        load_config(None)


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert make_config("bound-scan").out_dir == tmp_path / "env"
    assert make_config("bound-scan", out_dir=tmp_path / "flag").out_dir == tmp_path / "flag"


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_rerun_is_byte_identical(tmp_path, experiment):
    cfg, first = _run(tmp_path, experiment, sub="a")
    _, second = _run(tmp_path, experiment, sub="b")
    assert first["files"]
    for pa, pb in zip(first["files"], second["files"]):
        assert pa.name == pb.name
        assert pa.read_bytes() == pb.read_bytes()
        if pa.suffix == ".csv":
            rows = list(csv.DictReader(pa.open()))
            assert rows and all(r["config_hash"] == cfg.config_hash for r in rows)
        else:
            assert json.loads(pa.read_text())["config_hash"] == cfg.config_hash


def test_threads_do_not_change_results(tmp_path):
    a = run(make_config("degeneracy", SMALL["degeneracy"], seed=4, out_dir=tmp_path / "a"))
    b = run(make_config("degeneracy", SMALL["degeneracy"], seed=4, out_dir=tmp_path / "b", threads=2))
    assert a["files"][0].read_bytes() == b["files"][0].read_bytes()


def test_csv_schemas(tmp_path):
    _, res = _run(tmp_path, "compare-schedules")
    header = res["files"][0].read_text().splitlines()[0]
    assert header == "schedule_name,tau,P,dt,eps_res,config_hash"
    _, res = _run(tmp_path, "bound-scan")
    assert res["files"][0].read_text().splitlines()[0] == \
        "N,P,eps_res_opt,bound,saturated,converged,grad_norm,config_hash"
    assert res["ok"]
    _, res = _run(tmp_path, "field-scan")
    assert res["files"][0].read_text().splitlines()[0] == "h,m,s_m,gamma,beta,config_hash"


def test_write_csv_column_order(tmp_path):
    path = write_csv(tmp_path / "t.csv", ("b", "a"), [{"a": 1, "b": 0.5}], "h")
    assert path.read_text() == "b,a,config_hash\n0.5,1,h\n"


def test_degeneracy_counts_small(tmp_path):
    _, res = _run(tmp_path, "degeneracy")
    assert [(r["P"], r["n_distinct"]) for r in res["results"]] == [(1, 2), (2, 4)]


def test_validate_and_negative_control(tmp_path):
    _, res = _run(tmp_path, "validate")
    assert res["ok"] and all(c["passed"] for c in res["checks"])
    bad = dict(SMALL["validate"], corrupt_rotation_sign="true")
    res = run(make_config("validate", bad, seed=7, out_dir=tmp_path / "bad"))
    oracle = res["checks"][0]
    assert oracle["name"] == "oracle_equivalence" and not oracle["passed"] and not res["ok"]


def test_flat_point():
    s = np.array([0.1, 0.3, 0.45, 0.5, 0.55, 0.7, 0.9])
    assert flat_point(s) == (3, pytest.approx(0.475))


def test_cli_exit_codes(tmp_path, capsys):
    small = [f"--set={k}={v}" for k, v in SMALL["validate"].items()]
    assert cli.main(["--experiment", "validate", "--seed", "1", "--out", str(tmp_path), *small]) == 0
    assert cli.main(["--experiment", "validate", "--seed", "1", "--out", str(tmp_path), *small,
                     "--set", "corrupt_rotation_sign=1"]) == 1
    assert cli.main(["--experiment", "degeneracy", "--out", str(tmp_path)]) == 2
    assert cli.main(["--experiment", "validate", "--seed", "1", "--set", "novalue"]) == 2
    assert "config error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "qaoa_ising", "--experiment", "bound-scan", "--out", str(tmp_path),
                          "--set", "n_sites=10", "--set", "p_max=3"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "bound_scan.csv").exists()
