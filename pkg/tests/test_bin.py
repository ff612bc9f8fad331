import csv
import json
import os
import shlex
import subprocess
import sys
from pathlib import Path

import pytest

import otcells


def otcells_cmd(args=""):
    return [sys.executable, "-m", "otcells"] + shlex.split(args)


def run_cmd(cmd, expect=0, cwd=None):
    env = dict(os.environ)
    env.pop("OTCELLS_DEBUG", None)
    # Make sure the checkout is importable from the subprocess.
    env["PYTHONPATH"] = str(Path().resolve()) + os.pathsep + env.get("PYTHONPATH", "")

    result = subprocess.run(
        cmd,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        universal_newlines=True,
        shell=False,
        env=env,
        cwd=cwd,
    )
    assert result.returncode == expect
    return (result.stdout, result.stderr)


def test_version():
    out, _ = run_cmd(otcells_cmd("--version"))
    assert out.strip() == "otcells " + otcells.__version__


def test_no_command():
    _, err = run_cmd(otcells_cmd(), expect=2)
    assert "usage: otcells" in err


def test_help_lists_exit_status():
    out, _ = run_cmd(otcells_cmd("--help"))
    for command in ("run", "sweep", "compare", "oracle", "presets"):
        assert command in out
    assert "exit status" in out


def test_presets():
    out, _ = run_cmd(otcells_cmd("presets list"))
    names = out.split()
    assert "poa-toy" in names
    assert "example1-uniform" in names

    out, _ = run_cmd(otcells_cmd("presets show poa-toy"))
    assert "[station.1]" in out

    _, err = run_cmd(otcells_cmd("presets show"), expect=1)
    assert "preset name is required" in err

    _, err = run_cmd(otcells_cmd("presets show nope"), expect=1)
    assert "no preset named 'nope'" in err


def test_run(resources, tmp_path):
    out, _ = run_cmd(
        otcells_cmd(f"run {resources}/round-robin.scn -o {tmp_path / 'out'}")
    )
    assert "scenario round-robin (round-robin)" in out
    assert "converged: True" in out
    report = json.loads((tmp_path / "out" / "round-robin-report.json").read_text())
    assert report["converged"]
    assert (tmp_path / "out" / "round-robin-partition.csv").exists()


def test_run_writes_to_working_directory(resources, tmp_path):
    run_cmd(otcells_cmd(f"run {resources}/round-robin.scn"), cwd=tmp_path)
    assert sorted(os.listdir(tmp_path)) == [
        "round-robin-partition.csv",
        "round-robin-report.json",
    ]


def test_run_wardrop(resources, tmp_path):
    out, _ = run_cmd(otcells_cmd(f"run {resources}/two-stations.scn -o {tmp_path}"))
    assert "price of anarchy" in out


def test_run_not_converged(resources, tmp_path):
    path = tmp_path / "slow.scn"
    path.write_text(
        Path(resources, "round-robin.scn").read_text() + "\n[solver]\nmax_iter = 1\n"
    )
    out, err = run_cmd(otcells_cmd(f"run {path} -o {tmp_path}"), expect=2)
    assert "converged: False" in out
    assert "ConvergenceWarning" in err
    assert (tmp_path / "slow-report.json").exists()


def test_invalid_scenario(resources, tmp_path):
    _, err = run_cmd(otcells_cmd(f"run {resources}/bad-sigma.scn -o {tmp_path}"), expect=1)
    assert "line 6:" in err
    assert "radio.sigma" in err
    assert "Traceback" not in err
    assert not os.listdir(tmp_path)


def test_syntax_error(resources, tmp_path):
    _, err = run_cmd(
        otcells_cmd(f"run {resources}/syntax-error.scn -o {tmp_path}"), expect=1
    )
    assert 'syntax-error.scn", line' in err
    assert "Traceback" not in err


def test_unknown_scenario(tmp_path):
    _, err = run_cmd(otcells_cmd(f"run no-such-scenario -o {tmp_path}"), expect=1)
    assert "no scenario file or preset named 'no-such-scenario'" in err


def test_sweep(resources, tmp_path):
    out, _ = run_cmd(
        otcells_cmd(
            f"sweep {resources}/two-stations.scn --station 2"
            f" --from -9 --to -1 --steps 3 --jobs 2 -o {tmp_path}"
        )
    )
    assert "3 positions written" in out
    with open(tmp_path / "two-stations-sweep.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [float(r["param_value"]) for r in rows] == [-9.0, -5.0, -1.0]


def test_sweep_bad_station(resources, tmp_path):
    _, err = run_cmd(
        otcells_cmd(
            f"sweep {resources}/two-stations.scn --station 9"
            f" --from -9 --to -1 --steps 3 -o {tmp_path}"
        ),
        expect=1,
    )
    assert "no station 9" in err


def test_compare(resources, tmp_path):
    out, _ = run_cmd(
        otcells_cmd(
            f"compare {resources}/round-robin.scn"
            f" --policies round-robin,rate-fair -o {tmp_path}"
        )
    )
    assert "round-robin/rate-fair" in out
    comparison = json.loads((tmp_path / "round-robin-comparison.json").read_text())
    assert set(comparison["policies"]) == {"round-robin", "rate-fair"}


@pytest.mark.parametrize(
    "name, mode", [("small-congestion", "exhaustive"), ("round-robin", "threshold-scan")]
)
def test_oracle(resources, name, mode):
    out, _ = run_cmd(otcells_cmd(f"oracle {resources}/{name}.scn"))
    assert f"oracle ({mode})" in out


def test_oracle_disagreement(resources):
    # A negative tolerance can't be met even by an exact match.
    _, err = run_cmd(
        otcells_cmd(f"oracle {resources}/small-congestion.scn --rtol -1"), expect=1
    )
    assert "disagree" in err
