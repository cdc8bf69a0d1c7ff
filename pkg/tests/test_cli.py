import json

import pytest

from multipdo.cli import main
from multipdo.grid import GridSpec
from multipdo.io import save_gridfn

from conftest import banded


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exponents_critical(tmp_path, capsys):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"N": 2, "n": 1, "p": "3/2", "p_j": ["2", "2"],
                               "s": "1", "s_j": ["1/2", "1/2"]}))
    code, out, _ = run(capsys, "exponents", "critical", "--config", str(cfg))
    assert code == 0 and out.strip() == "-0.5"
    code, out, _ = run(capsys, "exponents", "critical", "--config", str(cfg), "--n", "2")
    assert out.strip() == "-1"


def test_norm_lq(capsys):
    code, out, _ = run(capsys, "norm", "--space", "lq", "--q", "1", "--seq", "3,4")
    assert code == 0 and out.strip() == "7"


def test_missing_flag_exit_1(capsys):
    code, _, err = run(capsys, "norm", "--q", "1")
    assert code == 1 and "--space" in err
    code, _, err = run(capsys, "norm", "--space", "lq", "--q", "1")
    assert code == 1 and "seq" in err


def test_besov_norm_json(tmp_path, capsys):
    f = banded(GridSpec(1, 1024, 1.0), 100, 0)
    path = tmp_path / "f.gridfn"
    save_gridfn(f, path)
    code, out, _ = run(capsys, "norm", "--space", "besov", "--p", "2", "--q", "2", "--s", "0.5",
                       "--block", "hp", "--input", str(path))
    lines = out.strip().splitlines()
    rec = json.loads(lines[1])
    assert code == 0 and float(lines[0]) == pytest.approx(rec["value"])
    assert len(rec["per_block"]) == 10


def test_computation_error_exit_2(tmp_path, capsys):
    f = banded(GridSpec(1, 1024, 1.0), 400, 0)
    path = tmp_path / "f.gridfn"
    save_gridfn(f, path)
    code, _, err = run(capsys, "norm", "--space", "besov", "--p", "2", "--q", "2", "--K", "3",
                       "--input", str(path))
    assert code == 2 and "covered" in err


def test_experiment_outputs_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ell_range": [6, 9], "seed": 4}))
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "experiment", "sharpness-s", "--config", str(cfg), "--seed", "7",
                     "--out", str(out))
    assert code == 0
    assert out.read_text().startswith("level,measured,theory,log2_measured\n")
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["parameters"]["resolved_config"]["seed"] == 7
    assert meta["parameters"]["resolved_config"]["ell_range"] == [6, 9]


def test_experiment_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": 1}))
    code, _, err = run(capsys, "experiment", "keyprop", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_dry_run(capsys):
    code, out, _ = run(capsys, "experiment", "embeddings", "--dry-run", "--seed", "2")
    assert code == 0 and json.loads(out)["resolved"]["seed"] == 2


def test_windows_and_extremal(tmp_path, capsys):
    code, out, _ = run(capsys, "windows", "verify", "--kind", "generic_lp", "--K", "5")
    assert code == 0 and all(c["passed"] for c in json.loads(out)["checks"])
    code, _, _ = run(capsys, "windows", "make", "--kind", "phi", "--variant", "s4", "--out",
                     str(tmp_path / "w"))
    assert code == 0 and (tmp_path / "w" / "phi_0.gridfn").exists()
    code, out, _ = run(capsys, "extremal", "enumerate", "--variant", "nec1", "--ell", "5")
    assert code == 0 and len(out.strip().splitlines()) == 47
    code, out, _ = run(capsys, "extremal", "sum", "--variant", "nec1", "--ell", "6",
                       "--m", "-0.5", "--b", "0.55,0.55")
    assert code == 0 and float(out) > 0


def test_op_apply(tmp_path, capsys):
    spec = GridSpec(1, 64, 1.0)
    for i in range(2):
        save_gridfn(banded(spec, 5, i), tmp_path / f"f{i}.gridfn")
    sym = tmp_path / "s.json"
    sym.write_text(json.dumps({"kind": "constant", "c": 1, "N": 2}))
    outs = []
    for method in ("direct", "expansion"):
        code, _, _ = run(capsys, "op", "apply", "--symbol", str(sym), "--inputs",
                         str(tmp_path / "f0.gridfn"), str(tmp_path / "f1.gridfn"),
                         "--method", method, "--radius", "32", "--out", str(tmp_path / f"{method}.gridfn"))
        assert code == 0
        from multipdo.io import load_gridfn
        outs.append(load_gridfn(tmp_path / f"{method}.gridfn").values())
    import numpy as np
    assert np.abs(outs[0] - outs[1]).max() < 1e-4 * np.abs(outs[0]).max()
