"""Command-line workflows: forward, reconstruct, kernels and verify."""

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import CONFIGS
from dsmkit import cli
from dsmkit.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_SOLVER, main, spec_from_dict

EXAMPLE1 = CONFIGS / "example1.json"


def _config(tmp_path, **changes):
    data = json.loads(EXAMPLE1.read_text())
    for key, value in changes.items():
        data[key] = value
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def _csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


@pytest.fixture(scope="module")
def example1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ex1")
    assert main(["forward", "--config", str(EXAMPLE1), "--out", str(out)]) == EXIT_OK
    assert main(["reconstruct", "--config", str(EXAMPLE1), "--out", str(out)]) == EXIT_OK
    return out


# ---------------------------------------------------------------------------
# forward and reconstruct
# ---------------------------------------------------------------------------
def test_forward_writes_four_traces(example1_run):
    for name in ("trace_low", "trace_high", "trace_low_clean", "trace_high_clean"):
        path = example1_run / f"{name}.csv"
        lines = path.read_text().splitlines()
        assert lines[0] == "theta,re,im" and len(lines) == 49


def test_noisy_traces_differ_from_clean(example1_run):
    a, b = _csv(example1_run / "trace_low.csv"), _csv(example1_run / "trace_low_clean.csv")
    assert not np.array_equal(a, b)
    assert np.all(np.abs(a[:, 1] - b[:, 1]) <= 0.03 * np.abs(b[:, 1]) + 1e-300)


def test_zero_noise_gives_equal_files(tmp_path):
    cfg = _config(tmp_path, noise={"delta": 0.0, "seed": 3})
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    for name in ("low", "high"):
        o = tmp_path / "o"
        assert (o / f"trace_{name}.csv").read_bytes() == (o / f"trace_{name}_clean.csv").read_bytes()


def test_reconstruct_outputs(example1_run):
    for name in ("index_mo.csv", "index_mo.pgm", "index_di.csv", "index_di.pgm", "directions.csv", "summary.json"):
        assert (example1_run / name).exists()
    text = (example1_run / "summary.json").read_text()
    assert text.splitlines()[0] == '{"schema_version": "dsmkit-summary/1",'
    summary = json.loads(text)
    for key in ("argmax_mo", "argmax_di", "local_maxima_mo", "local_maxima_di", "params"):
        assert key in summary
    assert summary["params"]["gamma"] == 1.0 and summary["params"]["probes"] == 48
    mo = _csv(example1_run / "index_mo.csv")
    i = int(np.argmax(mo[:, 2]))
    assert list(mo[i, :2]) == summary["argmax_mo"]
    assert mo[:, 2].max() == 1.0


@pytest.mark.xfail(strict=True, reason="method limitation on this configuration; see the decisions ledger")
def test_example1_summary_argmax_mo(example1_run):
    summary = json.loads((example1_run / "summary.json").read_text())
    assert math.dist(summary["argmax_mo"], (0.4, 0.0)) <= 0.15


def test_reruns_are_byte_identical(tmp_path, example1_run):
    out = tmp_path / "again"
    assert main(["forward", "--config", str(EXAMPLE1), "--out", str(out)]) == EXIT_OK
    assert main(["reconstruct", "--config", str(EXAMPLE1), "--out", str(out)]) == EXIT_OK
    names = sorted(p.name for p in example1_run.iterdir())
    assert names == sorted(p.name for p in out.iterdir())
    for name in names:
        assert (out / name).read_bytes() == (example1_run / name).read_bytes(), name


def test_gamma_zero_override_is_flatter(tmp_path, example1_run):
    out = tmp_path / "g0"
    args = ["reconstruct", "--config", str(EXAMPLE1), "--out", str(out), "--traces", str(example1_run), "--gamma", "0"]
    assert main(args) == EXIT_OK
    ratio = lambda v: v.max() / v.mean()
    g1 = _csv(example1_run / "index_mo.csv")[:, 2]
    g0 = _csv(out / "index_mo.csv")[:, 2]
    assert ratio(g0) < ratio(g1)
    assert json.loads((out / "summary.json").read_text())["params"]["gamma"] == 0.0


def test_single_influx_mode(tmp_path):
    data = json.loads(EXAMPLE1.read_text())
    del data["influx_high"]
    data["influx"] = data.pop("influx_low")
    cfg = tmp_path / "single.json"
    cfg.write_text(json.dumps(data))
    out = tmp_path / "s"
    assert main(["forward", "--config", str(cfg), "--out", str(out), "--single"]) == EXIT_OK
    assert not (out / "trace_high.csv").exists()
    assert main(["reconstruct", "--config", str(cfg), "--out", str(out), "--single"]) == EXIT_OK
    assert json.loads((out / "summary.json").read_text())["params"]["single"] is True


# ---------------------------------------------------------------------------
# errors and exit codes
# ---------------------------------------------------------------------------
def test_overlap_exit_code_and_message(tmp_path, capsys):
    incs = [
        {"center": [0.0, 0.0], "radius": 0.3, "kind": "v", "value": 15},
        {"center": [0.2, 0.0], "radius": 0.2, "kind": "sigma", "value": 2},
    ]
    cfg = _config(tmp_path, inclusions=incs)
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "inclusions[0]" in err and "inclusions[1]" in err and "overlap" in err


@pytest.mark.parametrize(
    "changes,needle",
    [
        ({"influx_high": {"mode": 1}}, "influx_high.mode"),
        ({"noise": {"delta": -1}}, "noise.delta"),
        ({"probes": {"count": 0}}, "probes.count"),
        ({"params": {"gamma": 1, "zeta": 2}}, "params.zeta"),
        ({"grid": {"spacing": 0.02, "max_radius": 1.2}}, "grid.max_radius"),
        ({"mesh": {"h": 0.5}}, "mesh.h"),
        ({"mesh": {"formulation": "mixed"}}, "mesh.formulation"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, changes, needle):
    cfg = _config(tmp_path, **changes)
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_bad_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["forward", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["forward", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_solver_error_exit_code(tmp_path):
    cfg = _config(tmp_path, background={"sigma0": 1.0, "v0": 0.0, "radius": 1.0})
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_SOLVER


def test_data_errors(tmp_path, example1_run):
    out = tmp_path / "empty"
    out.mkdir()
    assert main(["reconstruct", "--config", str(EXAMPLE1), "--out", str(out)]) == EXIT_DATA
    cfg = _config(tmp_path, probes={"count": 64})
    args = ["reconstruct", "--config", str(cfg), "--out", str(tmp_path / "r"), "--traces", str(example1_run)]
    assert main(args) == EXIT_DATA


def test_spec_defaults():
    spec = spec_from_dict({"influx_low": {"mode": 1}, "influx_high": {"mode": 20}})
    assert spec.probes == 48 and spec.delta == 0.0 and spec.spacing == 0.02
    assert spec.background.v0 == 10.0 and spec.params.clamp_eta == 0.1
    assert spec.formulation == "difference"


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------
def _printed(capsys):
    return capsys.readouterr().out.split()


@pytest.mark.parametrize("kernel,r1,expected", [("k4", 0.4, 0.386), ("k1", 0.7, 0.666)])
def test_kernels_argmax(capsys, kernel, r1, expected):
    assert main(["kernels", "argmax", kernel, "--r1", str(r1)]) == EXIT_OK
    words = _printed(capsys)
    r2 = float(words[words.index("r2") + 1])
    assert abs(r2 - expected) <= 0.01


def test_kernels_k1_scan(tmp_path, capsys):
    assert main(["kernels", "k1", "--z", "0.5,0.2", "--out", str(tmp_path)]) == EXIT_OK
    data = _csv(tmp_path / "k1.csv")
    i = int(np.argmax(data[:, 2]))
    assert math.dist(data[i, :2], (0.5, 0.2)) <= 0.1
    assert (tmp_path / "k1.csv").read_text().startswith("x,y,value\n")


@pytest.mark.parametrize("mode", ["k2", "k3", "k4"])
def test_kernels_other_scans(tmp_path, mode):
    assert main(["kernels", mode, "--z", "0.3,-0.4", "--out", str(tmp_path), "--spacing", "0.05"]) == EXIT_OK
    assert _csv(tmp_path / f"{mode}.csv").shape[1] == 3


def test_kernels_3d(tmp_path, capsys):
    assert main(["kernels", "3d", "--x", "0.114,0.114,0.396", "--out", str(tmp_path)]) == EXIT_OK
    data = _csv(tmp_path / "k1_3d.csv")
    i = int(np.argmax(data[:, 3]))
    assert np.linalg.norm(data[i, :3] - [0.114, 0.114, 0.396]) <= 0.1


def test_kernels_bad_arguments(capsys):
    assert main(["kernels", "k1", "--z", "0.5"]) == EXIT_CONFIG
    assert main(["kernels", "argmax", "k1", "--r1", "0.99"]) == EXIT_CONFIG
    assert main(["kernels", "3d", "--x", "0.9,0.9,0.9"]) == EXIT_CONFIG


# ---------------------------------------------------------------------------
# verify and the installed entry point
# ---------------------------------------------------------------------------
def test_verify_runs_acceptance_file(monkeypatch, tmp_path):
    seen = {}

    def fake_call(cmd):
        seen["cmd"] = cmd
        return 0

    monkeypatch.setattr(cli.subprocess, "call", fake_call)
    assert main(["verify", "--out", str(tmp_path)]) == 0
    assert any(str(a).endswith("test_acceptance.py") for a in seen["cmd"])
    assert "--junitxml" in seen["cmd"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dsmkit", "kernels", "argmax", "k4", "--r1", "0.6"], capture_output=True, text=True)
    assert res.returncode == 0
    assert abs(float(res.stdout.split()[5]) - 0.598) <= 0.01
