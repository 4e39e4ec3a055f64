"""Command-line behavior: exit codes, flag overrides, determinism of the
emitted CSV data across thread counts."""

import json

import pytest

from topoflock.cli import main

UNIFORM = {"type": "uniform", "lo": 0.0, "hi": 1.0}


def write_cfg(path, **over):
    doc = {
        "experiment": "simulate",
        "kernel": {"family": "affine", "a": 1.0, "b": 0.5},
        "initial": {"kind": "product", "x": [UNIFORM], "v": [UNIFORM]},
        "n": 8,
        "dt": 0.1,
        "t_final": 0.2,
        "rng_seed": 11,
    }
    doc.update(over)
    path.write_text(json.dumps(doc))
    return path


def test_success_writes_and_announces_files(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json")
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "trajectory.csv" in stdout and "summary.json" in stdout
    summary = json.load(open(out / "summary.json"))
    assert summary["rng_seed"] == 11


def test_missing_config_file_is_io_error(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 4
    assert "cannot read config" in capsys.readouterr().err


def test_malformed_json_is_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_invalid_field_is_validation_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", dt=-0.5)
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "dt" in capsys.readouterr().err


def test_subcommand_config_mismatch(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json")
    assert main(["chaos", "--config", str(cfg)]) == 2
    assert "subcommand" in capsys.readouterr().err


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_cfg(tmp_path / "c.json")
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "777"]) == 0
    summary = json.load(open(out / "summary.json"))
    assert summary["rng_seed"] == 777
    assert summary["config"]["rng_seed"] == 777


def test_bad_seed_and_threads_flags(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json")
    assert main(["simulate", "--config", str(cfg), "--seed", "-3"]) == 2
    assert main(["simulate", "--config", str(cfg), "--seed", str(2**64)]) == 2
    assert main(["simulate", "--config", str(cfg), "--threads", "0"]) == 2
    capsys.readouterr()


def test_unknown_subcommand_rejected(tmp_path):
    cfg = write_cfg(tmp_path / "c.json")
    with pytest.raises(SystemExit):
        main(["warp", "--config", str(cfg)])


def test_shock_truncation_exits_numerical(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path / "c.json",
        experiment="euler-compare",
        initial={
            "kind": "monokinetic",
            "rho0": UNIFORM,
            "u0": {"type": "sine", "amplitude": -0.8},
        },
        n_list=[64],
        epsilon_list=[1e-3],
        grid_cells=256,
        kernel={"family": "constant", "kappa": 1e-3},
        dt=0.1,
        t_final=0.5,
        trials=1,
    )
    out = tmp_path / "run"
    code = main(["euler-compare", "--config", str(cfg), "--out", str(out)])
    assert code == 3
    err = capsys.readouterr().err
    assert "halted" in err
    summary = json.load(open(out / "summary.json"))
    assert summary["euler_compare"]["shock_time"] is not None


def test_selftest_subcommand_runs_clean(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(
        json.dumps(
            {
                "experiment": "metrics-selftest",
                "kernel": {"family": "constant", "kappa": 1.0},
                "suite_size": 25,
                "rng_seed": 4,
            }
        )
    )
    out = tmp_path / "run"
    assert main(["metrics-selftest", "--config", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()


def test_thread_count_leaves_csv_bytes_unchanged(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path / "c.json",
        experiment="chaos",
        n_list=[4, 8],
        m_ref=16,
        trials=3,
        rng_seed=2025,
    )
    outs = []
    for k, threads in enumerate(("1", "3")):
        out = tmp_path / f"run{k}"
        code = main(
            ["chaos", "--config", str(cfg), "--out", str(out), "--threads", threads]
        )
        assert code == 0
        outs.append((out / "chaos_deviation.csv").read_bytes())
    assert outs[0] == outs[1]
    capsys.readouterr()
