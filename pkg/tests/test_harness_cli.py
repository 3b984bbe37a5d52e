import json

import numpy as np
import pytest
import yaml

from adaptdeconv.cli import EXIT_NUMERICAL, EXIT_VALIDATION, main
from adaptdeconv.harness import ConfigError, ExperimentConfig, run_experiment
from adaptdeconv.model import Laplace, PolynomialNoise, StableNoise, sample_convolution, save_sample

BASE = {"scenario": "level", "noise": {"kind": "polynomial", "sigma": 2.0}, "n_list": [100, 200], "reps": 6,
        "c_star": 1.0, "quadrature": {"u_max": 50, "m_points": 256}}


@pytest.mark.parametrize("patch, field", [
    ({"n_list": [200, 100]}, "n_list"),
    ({"n_list": []}, "n_list"),
    ({"scenario": "bogus"}, "scenario"),
    ({"colour": "red"}, "colour"),
    ({"eps": 0.0}, "eps"),
    ({"noise": {"kind": "weird"}}, "noise"),
    ({"quadrature": {"m_points": 100}}, "quadrature"),
    ({"scenario": "s_index"}, "noise"),
])
def test_config_validation_names_field(patch, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({**BASE, **patch})
    assert info.value.field == field


def test_missing_required_field():
    d = dict(BASE)
    del d["noise"]
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(d)
    assert info.value.field == "noise"


def test_outputs_identical_across_threads(tmp_path):
    run_experiment({**BASE, "threads": 1}, tmp_path / "a")
    run_experiment({**BASE, "threads": 3}, tmp_path / "b")
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
    sa = json.loads((tmp_path / "a" / "summary.json").read_text())
    sb = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert sa["results"] == sb["results"]
    lines = (tmp_path / "a" / "results.csv").read_bytes().split(b"\r\n")
    assert lines[0].startswith(b"n,replicate,")
    assert len([ln for ln in lines if ln]) == 1 + 12


def test_s_index_scenario_records_failures():
    cfg = {"scenario": "s_index", "noise": {"kind": "stable", "s": 1.5}, "n_list": [1000], "reps": 5,
           "sindex": {"s_lo": 1.0, "s_hi": 2.0, "beta_prime": 2.0, "A": 0.5}}
    rows, summary = run_experiment(cfg)
    res = summary["results"][0]
    assert res["grid_size"] >= 2 and 0.0 <= res["agreement"] <= 1.0
    assert all(r["error"] in ("", "OrderingError", "NTooSmall") for r in rows)


def _sample_file(tmp_path, g, n=2000, seed=0):
    s = sample_convolution(Laplace(), g, n, np.random.default_rng(seed))
    path = tmp_path / "y.txt"
    save_sample(s, path)
    return str(path)


def test_cli_simulate_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"n": 7, "seed": 3}))
    assert main(["simulate", "--config", str(cfg), "--n", "5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n"] == 5 and out["seed"] == 3 and len(out["y"]) == 5


def test_cli_commands(tmp_path, capsys):
    path = _sample_file(tmp_path, PolynomialNoise(2.0), n=300)
    assert main(["test-poly", "--sample", path, "--m-points", "256", "--c-star", "1.0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert {"reject", "max_ratio", "per_point"} <= set(out)
    stable = _sample_file(tmp_path, StableNoise(1.0))
    assert main(["quadfunc", "--sample", stable, "--s-lo", "0.5", "--s-hi", "1.0", "--beta-prime", "0",
                 "--a", "2.5", "--m-points", "512"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mode"] == "quadratic_functional"
    assert main(["test-stable", "--sample", stable, "--s-hat", "1.0", "--beta-bar", "0.5", "--pretty"]) == 0
    assert "max_ratio" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    path = _sample_file(tmp_path, StableNoise(1.0), n=100)
    # small n: the frequency bracket is negative
    assert main(["estimate-s", "--sample", path]) == EXIT_VALIDATION
    assert "NTooSmall" in capsys.readouterr().err
    assert main(["simulate", "--noise", "stable:3"]) == EXIT_VALIDATION
    # the ordering check fails at a frequency below 1
    big = _sample_file(tmp_path, StableNoise(1.5), n=5000)
    assert main(["estimate-s", "--sample", big, "--s-lo", "1", "--s-hi", "2"]) == EXIT_NUMERICAL
    assert "OrderingError" in capsys.readouterr().err
    assert main(["experiment"]) == EXIT_VALIDATION
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_cli_experiment(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text(yaml.safe_dump({**BASE, "n_list": [100], "reps": 3}))
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "out"), "--seed", "4"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["config"]["seed"] == 4
    assert (tmp_path / "out" / "results.csv").exists()
