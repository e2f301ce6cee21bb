import json
import subprocess
import sys

import pytest

from wfanorm import fileformat
from wfanorm.cli import main
from wfanorm.numerics import Rational
from wfanorm.oracle import exact_equiv
from wfanorm.sre import parse_sre, thompson
from conftest import DATA, RUNNING_EXAMPLE_SRE

EXAMPLE = str(DATA / "example.json")
EXAMPLE_PA = str(DATA / "example_pa.json")


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as e:
        code = e.code
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


def test_mass(capsys):
    assert run(capsys, "mass", EXAMPLE)[:2] == (0, "28\n")
    assert run_json(capsys, "mass", EXAMPLE) == {"mass": "28", "finite": True}


def test_mass_diverges(capsys, tmp_path):
    p = tmp_path / "loop.json"
    p.write_text(json.dumps({"alphabet": ["a"], "states": 1, "initial": {"0": "1"},
                             "final": {"0": "1"},
                             "transitions": [{"from": 0, "symbol": "a", "to": 0, "weight": "2"}]}))
    assert run(capsys, "mass", str(p))[:2] == (0, "diverges\n")


def test_eval(capsys):
    assert run(capsys, "eval", EXAMPLE, "ab")[1] == "6\n"
    assert run(capsys, "eval", EXAMPLE, "a a b")[1] == "18/5\n"
    assert run_json(capsys, "eval", EXAMPLE, "")["weight"] == "0"


def test_rho(capsys):
    rep = run_json(capsys, "rho", EXAMPLE, "--tol", "1e-12")
    assert abs(rep["rho"] - 0.8) < 1e-8 and rep["mass_finite"] is True


def test_check(capsys):
    code, out, _ = run(capsys, "check", EXAMPLE)
    assert code == 0 and "not locally stochastic" in out and "q0: residual 3 FAIL" in out
    rep = run_json(capsys, "check", EXAMPLE_PA)
    assert rep["ok"] and rep["failing"] == [] and set(rep["residuals"].values()) == {"0"}


def test_normalize_to_file_and_equiv(capsys, tmp_path):
    out = tmp_path / "pa.json"
    code, text, _ = run(capsys, "normalize", EXAMPLE, "-o", str(out))
    assert code == 0 and text == "Z = 28\n"
    assert fileformat.load(out) == fileformat.load(EXAMPLE_PA)
    assert run(capsys, "equiv", EXAMPLE_PA, str(out))[1] == "equivalent\n"
    assert run_json(capsys, "equiv", EXAMPLE_PA, str(out), "--max-len", "6")["equivalent"]


def test_normalize_to_stdout(capsys):
    code, out, err = run(capsys, "normalize", EXAMPLE)
    assert code == 0 and err == "Z = 28\n"
    assert fileformat.loads(out) == fileformat.load(EXAMPLE_PA)


def test_equiv_witness(capsys):
    code, out, _ = run(capsys, "equiv", EXAMPLE, EXAMPLE_PA, "--max-len", "4")
    assert out.splitlines() == ["not equivalent", "witness: aa (2 vs 1/14)"]
    rep = run_json(capsys, "equiv", EXAMPLE, EXAMPLE_PA, "--exact")
    assert rep["equivalent"] is False and rep["mode"] == "exact"


def test_to_sre_and_back(capsys, tmp_path):
    code, out, _ = run(capsys, "to-sre", EXAMPLE_PA)
    r = parse_sre(out.strip())
    assert exact_equiv(thompson(r, "ab"), fileformat.load(EXAMPLE_PA))
    target = tmp_path / "back.json"
    assert run(capsys, "from-sre", RUNNING_EXAMPLE_SRE, "-o", str(target))[0] == 0
    assert exact_equiv(fileformat.load(target), fileformat.load(EXAMPLE_PA))


def test_decompose(capsys, tmp_path):
    target = tmp_path / "r.sre"
    code, out, _ = run(capsys, "decompose", EXAMPLE, "--epsilon", "1/4", "-o", str(target))
    assert out.splitlines() == ["zeta = 1", "Z = 28"]
    r = parse_sre(target.read_text())
    assert exact_equiv(thompson(r, "ab"), fileformat.load(EXAMPLE_PA))
    rep = run_json(capsys, "decompose", EXAMPLE)
    assert rep["zeta"] == "1" and rep["Z"] == "28" and rep["exact"]


def test_trop_decompose(capsys, tmp_path):
    src = tmp_path / "t.json"
    src.write_text(json.dumps({"semiring": "tropical", "alphabet": ["a"], "states": 1,
                               "initial": {"0": "1"}, "final": {"0": "0"},
                               "transitions": [{"from": 0, "symbol": "a", "to": 0, "weight": "3"}]}))
    res = tmp_path / "res.json"
    code, out, _ = run(capsys, "trop-decompose", str(src), "-o", str(res))
    assert out.splitlines() == ["gamma = 3", "c0 = 1"]
    residual = fileformat.load(res)
    assert residual.transitions["a"][0, 0] == 0 and residual.initial == (0,)
    assert run(capsys, "eval", str(src), "aa")[1] == "7\n"


def test_sample(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", EXAMPLE_PA, "-n", "1000", "--seed", "9")
    rows = [line.split("\t") for line in out.splitlines()]
    assert sum(int(c) for _, c in rows) == 1000
    assert run(capsys, "sample", EXAMPLE_PA, "-n", "1000", "--seed", "9")[1] == out
    expr = tmp_path / "e.sre"
    expr.write_text("b*[1/3]\n")
    rep = run_json(capsys, "sample", str(expr), "--sre", "-n", "100", "--seed", "1")
    assert rep["draws"] == 100 and all(set(w) <= {"b"} for w, _ in rep["words"])


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "sample", EXAMPLE, "-n", "5", "--seed", "1")
    assert code == 1 and err.startswith("not-stochastic:")
    code, _, err = run(capsys, "eval", EXAMPLE, "abc", "--json")
    assert code == 1 and json.loads(err)["error"] == "unknown-symbol"


def test_format_error_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"alphabet": ["a"],\n "states": }')
    code, _, err = run(capsys, "mass", str(bad))
    assert code == 1 and "line 2, column 12" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "mass")[0] == 2
    assert run(capsys, "decompose", EXAMPLE, "--epsilon", "-1")[0] == 2
    assert run(capsys, "equiv", EXAMPLE, EXAMPLE_PA, "--exact", "--max-len", "3")[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wfanorm.cli", "mass", EXAMPLE],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "28\n"
    proc = subprocess.run([sys.executable, "-m", "wfanorm.cli", "mass", "missing.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stderr.startswith("io:")
