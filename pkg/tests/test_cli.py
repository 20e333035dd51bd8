import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from funcldp.cli import run
from funcldp.covering import constant_curve_family
from funcldp.func_core import write_curves_csv

SMALL = {
    "design": {"radial_law": {"kind": "power", "gamma": 1.0}, "noise_sigma": 0.5, "grid_size": 21},
    "model": {"kind": "integral_linear", "parameters": {"a": 1.0, "b": 0.0}},
    "kernel": "linear_decay",
    "lambda": 0.3,
    "n_grid": [20, 40],
    "bandwidth_rule": {"c": 1.0, "a": 0.3},
    "replicates": 80,
    "master_seed": 99,
    "noise_mode": "gaussian",
    "uniform": {"radius": 0.1, "count": 5, "xi": 0.05},
}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def test_rate_first_row_is_origin():
    code, out, err = call("rate", "--kernel", "linear_decay", "--gamma", "1", "--s-max", "50")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["s", "I_quadrature", "I_ibp", "abs_diff"]
    assert float(rows[1][0]) == 0.0 and float(rows[1][1]) == 0.0
    assert float(rows[-1][0]) == 50.0
    assert max(float(r[3]) for r in rows[1:]) < 1e-8
    assert "\r" not in out
    manifest = json.loads(err.strip().splitlines()[-1])
    assert manifest["subcommand"] == "rate" and manifest["outputs"] == []


def test_gamma_plus_report():
    code, out, _ = call("gamma", "--side", "plus", "--kernel", "linear_decay", "--gamma", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["flag"] == "AT_UPPER_BOUND" and rep["argmin_t"] == "AT_UPPER_BOUND"
    assert abs(rep["value"] + 1) < 1e-12


def test_validate_kernel_json(tmp_path):
    target = tmp_path / "k.json"
    code, out, _ = call("validate-kernel", "--kernel", "linear_decay", "--out", str(target))
    assert code == 0
    assert json.loads(target.read_text())["lipschitz_constant"] == 0.5
    manifest = json.loads(out)
    assert manifest["outputs"] == [str(target)]
    assert set(manifest) == {"subcommand", "config_hash", "master_seed", "version", "outputs", "duration_s"}


def test_cover_from_csv(tmp_path):
    src = tmp_path / "fam.csv"
    fam = constant_curve_family(101)
    write_curves_csv(src, fam)
    code, out, _ = call("cover", "--input", str(src), "--xi", "0.1", "--xi-grid", "0.2,0.1,0.05,0.025")
    assert code == 0
    rep = json.loads(out)
    assert rep["tau"] == len(rep["centers"])
    assert abs(rep["alpha_hat"] - 1) <= 0.15


def test_simulate_threads_identical(tmp_path, small_cfg):
    paths = []
    for threads in ("1", "8"):
        p = tmp_path / f"t{threads}.csv"
        assert call("simulate", "--config", small_cfg, "--threads", threads, "--out", str(p))[0] == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_simulate_uniform_with_centers(tmp_path, small_cfg):
    fam = constant_curve_family(5, np.linspace(0, 1, 21))
    src = tmp_path / "fam.csv"
    write_curves_csv(src, [c for c in fam[:2]])
    net = tmp_path / "net.json"
    assert call("cover", "--input", str(src), "--xi", "0.1", "--out", str(net))[0] == 0
    code, out, _ = call("simulate", "--config", small_cfg, "--mode", "uniform", "--centers", str(net))
    assert code == 0 and out.startswith("n,h_n,n_phi")
    code, out, _ = call("simulate", "--config", small_cfg, "--mode", "uniform")
    assert code == 0


def test_seed_flag_overrides_file(small_cfg):
    a = call("simulate", "--config", small_cfg)[1]
    b = call("simulate", "--config", small_cfg, "--seed", "99")[1]
    c = call("simulate", "--config", small_cfg, "--seed", "100")[1]
    assert a == b != c
    _, _, err = call("simulate", "--config", small_cfg, "--replicates", "10")
    assert json.loads(err.strip().splitlines()[-1])["master_seed"] == 99


@pytest.mark.parametrize("argv,expected", [
    (["rate"], 0),
    (["gamma", "--side", "abs"], 0),
    (["validate-kernel", "--kernel", "exp_decay"], 0),
    (["bogus"], 2),
    ([], 2),
    (["simulate", "--config", "missing.json"], 2),
    (["simulate"], 2),
    (["gamma", "--side", "nowhere"], 2),
    (["rate", "--kernel", "epanechnikov"], 2),
    (["rate", "--kernel", "affine", "--a", "1", "--b", "2"], 2),
    (["rate", "--points", "1"], 2),
    (["cover", "--input", "missing.csv", "--xi", "0.1"], 2),
    (["cover", "--input", "x.csv", "--xi", "0.1", "--xi-grid", "a,b"], 2),
    (["rate", "--smallball", "exponential_type", "--p", "1"], 0),
    (["gamma", "--gamma", "0.5", "--lambda", "2", "--t-max", "1"], 0),
])
def test_exit_codes(argv, expected):
    assert call(*argv)[0] == expected


def test_bad_config_and_refusals(tmp_path, small_cfg):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(SMALL, colour="blue")))
    code, _, err = call("simulate", "--config", str(bad))
    assert code == 2 and "colour" in err
    bad.write_text("{not json")
    assert call("simulate", "--config", str(bad))[0] == 2
    # gaussian design is outside the exact MGF regime
    assert call("mgf", "--config", small_cfg, "--t", "1")[0] == 2
    assert call("mgf", "--config", small_cfg)[0] == 2
    assert call("simulate", "--config", small_cfg, "--threads", "0")[0] == 2


def test_numeric_failure_exit_code(monkeypatch):
    from funcldp import ratefn
    from funcldp.errors import NumericError

    def boom(*a, **k):
        raise NumericError("forced", {"where": "test"})

    monkeypatch.setattr(ratefn, "rate_I", boom)
    code, _, err = call("rate")
    assert code == 3 and "forced" in err


def test_mgf_subcommand(tmp_path):
    cfg = dict(SMALL, model={"kind": "constant", "parameters": {"c": 0.0}}, noise_mode="noiseless",
               n_grid=[100], replicates=100, **{"lambda": 1.0})
    p = tmp_path / "m.json"
    p.write_text(json.dumps(cfg))
    code, out, _ = call("mgf", "--config", str(p), "--t", "0.5", "--h", "0.2")
    assert code == 0
    rep = json.loads(out)
    assert {"empirical_scaled_logmgf", "exact_finite_n", "asymptotic", "mc_standard_error", "within_3se"} <= set(rep)


def test_console_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "funcldp.cli", "frobnicate"], capture_output=True, text=True, env=env)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
