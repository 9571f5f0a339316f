"""CLI tests: subcommands, file outputs, exit codes (0 ok, 1 usage, 2 failure)."""

import os

import pytest

from qrl_lake import cli


def write_desk_config(tmp_path):
    path = tmp_path / "desk.cfg"
    path.write_text(
        "total_timesteps = 2000\n"
        "rollout_length = 512\n"
        "eval_interval = 1000\n"
        "seeds = 1,2\n"
        "ent_samples = 40    # comment\n"
        "exp_pairs = 40\n"
        "exp_bins = 20\n"
        "ed_theta_samples = 3\n"
        "ed_k = 10\n"
    )
    return str(path)


def test_usage_error_exit_code_is_one(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["no-such-command"])
    assert err.value.code == 1


def test_train_requires_single_solution():
    with pytest.raises(SystemExit) as err:
        cli.main(["train", "--out", "/tmp/unused"])
    assert err.value.code == 1


def test_oracle_writes_csv(tmp_path, capsys):
    rc = cli.main(["oracle", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "reward threshold" in out
    with open(tmp_path / "oracle.csv") as fh:
        assert fh.readline().strip() == "state,value,action"
        assert len(fh.readlines()) == 16


def test_circuits_dump(capsys):
    assert cli.main(["circuits", "dump", "--id", "5"]) == 0
    out = capsys.readouterr().out
    assert "CRZ" in out and "params=28" in out


def test_circuits_dump_bad_id():
    with pytest.raises(SystemExit) as err:
        cli.main(["circuits", "dump", "--id", "99"])
    assert err.value.code == 1


def test_train_and_report_pipeline(tmp_path, capsys):
    cfg = write_desk_config(tmp_path)
    out = str(tmp_path / "out")
    for only in ("pqc1", "pqc2", "pqc9", "nn2"):
        for seed in ("1", "2"):
            rc = cli.main(["train", "--config", cfg, "--only", only,
                           "--seed", seed, "--out", out])
            assert rc == 0
    rc = cli.main(["metrics", "--config", cfg, "--only", "pqc1,pqc2,pqc9",
                   "--out", out])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "metrics.csv"))
    rc = cli.main(["report", "--config", cfg,
                   "--only", "pqc1,pqc2,pqc9,nn2", "--out", out])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "summary.csv"))
    rc = cli.main(["correlate", "--out", out])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "correlations.csv"))
    capsys.readouterr()


def test_report_without_runs_fails_with_two(tmp_path, capsys):
    rc = cli.main(["report", "--out", str(tmp_path / "empty")])
    assert rc == 2
    assert "missing run outputs" in capsys.readouterr().err


def test_correlate_without_summary_fails_with_two(tmp_path, capsys):
    rc = cli.main(["correlate", "--out", str(tmp_path)])
    assert rc == 2
