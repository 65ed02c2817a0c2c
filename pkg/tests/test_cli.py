import io
import json
import os
import subprocess
import sys

import pytest

from artifact import SCHEMA_VERSION, cli
from artifact.exactcore import ViolationError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_trdeg_fg():
    code, out, _ = run("trdeg", "fg", "--g", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["result"] == {"g": 2, "c_g": "7/207360"}
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["status"] == "ok"


def test_bare_hae_is_solve():
    code, out, _ = run("hae", "--gmax", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "hae solve"
    genera = doc["result"]["genera"]
    assert [x["g"] for x in genera] == [2, 3, 4]
    assert genera[0]["alphas"] == ["-299/207360"]
    assert genera[1]["gap"]["constant"] == "1/1008"


def test_output_is_byte_identical():
    a = run("trell", "fg", "--g", "2", "--kmax", "2")[1]
    b = run("trell", "fg", "--g", "2", "--kmax", "2")[1]
    assert a == b


def test_no_floats_anywhere():
    for argv in (("trdeg", "pi-check"), ("dict", "--order", "4"), ("block", "realization", "--s", "2")):
        code, out, _ = run(*argv)
        assert code == 0
        json.loads(out, parse_float=lambda s: pytest.fail(f"float {s} in {argv}"))


def test_csv_format():
    code, out, _ = run("trdeg", "fg", "--g", "3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "path,value"
    assert "result.c_g,245/429981696" in lines
    assert f"schema_version,{SCHEMA_VERSION}" in lines


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ng = 3\nformat=json\n")
    doc = json.loads(run("trdeg", "fg", "--config", str(cfg))[1])
    assert doc["result"]["c_g"] == "245/429981696"
    doc = json.loads(run("trdeg", "fg", "--config", str(cfg), "--g", "4")[1])
    assert doc["result"]["c_g"] == "259553/7430083706880"


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gmax\n")
    assert run("trdeg", "fg", "--config", str(cfg))[0] == 1
    cfg.write_text("unknown_key = 3\n")
    assert run("trdeg", "fg", "--config", str(cfg))[0] == 1
    assert run("trdeg", "fg", "--config", str(tmp_path / "missing.cfg"))[0] == 1


@pytest.mark.parametrize("argv", [("bogus",), ("trdeg",), ("trdeg", "fg", "--g", "x"),
                                  ("trdeg", "wgn", "--g", "0", "--n", "1"), ()])
def test_usage_errors_exit_one(argv):
    code, out, err = run(*argv)
    assert code == 1
    assert out == ""
    assert "usage error" in err


def test_violation_exits_two(monkeypatch):
    from artifact import painleve

    def broken(*a, **k):
        raise ViolationError("forced", {"residuals": [{"s_power": -1}]})
    monkeypatch.setattr(painleve, "cft_pi_check", broken)
    code, out, _ = run("crosscheck", "cft-pi", "--kmax", "1")
    assert code == 2
    doc = json.loads(out)
    assert doc["status"] == "violation"
    assert doc["error"]["details"]["residuals"] == [{"s_power": -1}]


def test_output_file(tmp_path):
    path = tmp_path / "o.json"
    code, out, _ = run("trdeg", "fg", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"]["g"] == 2


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
    first = run("trdeg", "fg", "--g", "2")[1]
    assert len(os.listdir(tmp_path)) == 1
    assert run("trdeg", "fg", "--g", "2")[1] == first


@pytest.mark.parametrize("argv", [
    ("trdeg", "wgn", "--g", "1", "--n", "2"),
    ("trell", "yseries", "--kmax", "2"),
    ("trell", "wgn", "--g", "0", "--n", "3", "--kmax", "1"),
    ("trell", "weber", "--g", "2", "--n", "1"),
    ("hae", "gap", "--g", "3"),
    ("hae", "beta", "--gmax", "2"),
    ("block", "descendants", "--k", "2"),
    ("block", "coeffs", "--kmax", "2"),
    ("dict", "--branch", "plus", "--order", "3"),
    ("crosscheck", "tr-pi"),
    ("crosscheck", "tr-hae", "--g", "2", "--kmax", "2"),
    ("crosscheck", "beta-block", "--kmax", "2"),
    ("crosscheck", "cft-pi", "--kmax", "2"),
    ("crosscheck", "instanton", "--order", "3", "--hbar-order", "1"),
])
def test_every_subcommand_runs(argv):
    code, out, err = run(*argv)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["command"] == " ".join(a for a in argv[:2] if not a.startswith("-"))


def test_weber_free_energy_via_cli():
    doc = json.loads(run("trell", "weber", "--g", "3", "--n", "1")[1])
    fe = doc["result"]["free_energy"]
    assert fe["coeff_nu^(2-2g)"] == fe["closed_form"] == "1/1008"


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "artifact", "trdeg", "fg", "--g", "2"],
                       capture_output=True, text=True, check=False)
    assert p.returncode == 0
    assert json.loads(p.stdout)["result"]["c_g"] == "7/207360"
