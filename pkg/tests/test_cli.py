import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from condpoisson.cli import run
from condpoisson.fixtures import NETWORKS
from condpoisson.genfun import f0, prob_F, stats

BIMOLECULAR = "1 0 1; 0 1 1"
RL = "0 0 1 1 1; 1 1 0 1 1"
NETWORK_DIR = Path(__file__).resolve().parent.parent / "networks"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def structured(*argv):
    code, out, err = call(*argv, "--out", "structured")
    assert code == 0, err
    return json.loads(out)


def test_f0_exact_and_float():
    value = f0(BIMOLECULAR, (1, 1, 1), (5, 5))
    code, out, _ = call("f0", "--matrix", BIMOLECULAR, "--lambda", "1,1,1", "--b", "5,5")
    assert code == 0
    assert out.strip() == f"F0(5, 5) = {value.numerator}/{value.denominator} ~ {float(value):.10g}"
    env = structured("f0", "--matrix", BIMOLECULAR, "--lambda", "1,1,1", "--b", "5,5")
    assert env["command"] == "f0"
    assert env["input"] == {"matrix": [[1, 0, 1], [0, 1, 1]], "lambda": ["1/1"] * 3, "b": [5, 5]}
    assert Fraction(env["result"]["f0"]["exact"]) == value


def test_f0_symbolic_and_float_modes():
    code, out, _ = call("f0", "--matrix", BIMOLECULAR, "--mode", "symbolic", "--b", "2,2")
    assert out.strip() == "F0(2, 2) = 1/4*lam1^2*lam2^2 + lam1*lam2*lam3 + 1/2*lam3^2"
    code, out, _ = call("f0", "--matrix", "1 1", "--lambda", "0.5,1/2", "--b", "3", "--mode", "float")
    assert out.strip() == "F0(3) = 0.1666666667"


def test_prob():
    env = structured("prob", "--matrix", "1 1", "--lambda", "1,1", "--b", "2")
    jp = prob_F("1 1", (1, 1), (2,))
    assert env["result"] == {"f0": "2/1", "rate_sum": "2/1", "probability": format(jp.value, ".10g")}


def test_moments():
    code, out, _ = call("moment", "--matrix", "1 1", "--lambda", "1,3", "--b", "4", "--j", "1")
    assert out.strip() == "E[X1^(1) | Y=(4)] = 1/1 ~ 1"
    env = structured("moment", "--matrix", BIMOLECULAR, "--lambda", "1,1,1", "--b", "1,1", "--j", "2", "--i", "1")
    assert env["result"]["moment"]["exact"] == "1/2"
    env = structured("moment", "--matrix", "1 1", "--lambda", "1,3", "--b", "4", "--j", "1", "--r", "2",
                     "--kind", "raw")
    assert env["result"]["moment"]["exact"] == "7/4"


def test_stats_matches_library():
    rep = stats(RL, (1,) * 5, (5, 5))
    env = structured("stats", "--matrix", RL, "--lambda", "1,1,1,1,1", "--b", "5,5")
    cor = env["result"]["correlation"]
    assert cor == [[format(c, ".10g") for c in row] for row in rep.correlation]
    assert [Fraction(m["exact"]) for m in env["result"]["means"]] == list(rep.means)
    code, out, _ = call("stats", "--matrix", RL, "--lambda", "1,1,1,1,1", "--b", "5,5")
    assert "-0.3647053019" in out and "-0.6350805993" in out
    code, out, _ = call("cor", "--matrix", RL, "--lambda", "1,1,1,1,1", "--b", "5,5")
    assert out.splitlines()[1].split()[:3] == ["X1", "1", "-0.3647053019"]


def test_guess_then_eval_reproduces_f0(tmp_path):
    env = structured("rec", "guess", "--matrix", "1 0 1; 0 2 1", "--lambda", "1,2,3")
    path = tmp_path / "water.json"
    path.write_text(json.dumps(env))
    for b in [(0, 0), (3, 1), (12, 9), (20, 20)]:
        got = structured("rec", "eval", "--rec", str(path), "--b", f"{b[0]},{b[1]}")
        assert Fraction(got["result"]["f0"]["exact"]) == f0("1 0 1; 0 2 1", (1, 2, 3), b)
    code, out, _ = call("rec", "verify", "--rec", str(path), "--window", "0:30")
    assert code == 0 and out.count("pass") == 2


def test_rec_verify_fixture_outcomes():
    code, out, _ = call("rec", "verify", "--fixture", "bimolecular", "--lambda", "1/2,2/3,3/5")
    assert code == 0 and out.splitlines() == ["direction 1: pass (225 points)", "direction 2: pass (225 points)"]
    code, out, _ = call("rec", "verify", "--fixture", "water", "--mode", "symbolic", "--window", "0:3")
    assert code == 1 and out.splitlines()[0] == "direction 1: FAIL at b=(0, 0) (1 points)"
    code, out, _ = call("rec", "verify", "--fixture", "two_row", "--matrix", BIMOLECULAR, "--lambda", "1,1,1")
    assert code == 1


def test_rec_guess_failure_is_domain_error():
    code, _, err = call("rec", "guess", "--matrix", BIMOLECULAR, "--lambda", "1,1,1", "--max-order", "1",
                        "--max-degree", "0")
    assert code == 1 and "no recurrence" in err


def test_crn_commands():
    futile = str(NETWORK_DIR / "futile.crn")
    code, out, _ = call("crn", "analyze", futile)
    assert (code, out.strip()) == (0, "c=6 l=2 rank=3 deficiency=1 weakly_reversible=true")
    bim = str(NETWORK_DIR / "bimolecular.crn")
    code, out, _ = call("crn", "balance", bim, "--x", "1,1,2/3")
    assert code == 0 and out.strip().endswith("complex balanced")
    code, _, _ = call("crn", "balance", bim, "--x", "1,1,1")
    assert code == 1
    env = structured("crn", "conservation", bim)
    assert env["result"]["rows"] == [[1, 0, 1], [0, 1, 1]]
    bad = str(NETWORK_DIR / "counterexample.crn")
    code, out, _ = call("crn", "cme-check", bad, "--x", "2,1", "--radius", "4")
    assert code == 1 and "nonzero" in out
    code, out, _ = call("crn", "cme-check", bim, "--x", "1,1,2/3", "--radius", "6")
    assert code == 0
    code, out, _ = call("crn", "lemma-check", bim, "--x", "1,1,2/3", "--seed", "3")
    assert code == 0 and "100" in out


def test_network_files_match_fixtures():
    files = {"one_row": "one_plus_one", "futile_cycle": "futile"}
    for name, fx in NETWORKS.items():
        text = (NETWORK_DIR / f"{files.get(name, name)}.crn").read_text()
        assert text.split("\n", 1)[1] == fx.text


@pytest.mark.parametrize("argv", [
    ("f0", "--matrix", BIMOLECULAR, "--b", "1,1"),
    ("f0", "--matrix", BIMOLECULAR, "--lambda", "1,1", "--b", "1,1"),
    ("f0", "--matrix", "1 0; 0 0", "--lambda", "1,1", "--b", "1,1"),
    ("f0", "--matrix", BIMOLECULAR, "--lambda", "1,1,1", "--b", "1,x"),
    ("stats", "--matrix", BIMOLECULAR, "--mode", "symbolic", "--b", "1,1"),
    ("moment", "--matrix", "1 1", "--lambda", "1,1", "--b", "2", "--j", "3"),
    ("frobnicate",),
    ("crn", "analyze", "/nonexistent.crn"),
])
def test_usage_errors_exit_2(argv):
    code, _, err = call(*argv)
    assert code == 2 and err


def test_syntax_error_in_network_file(tmp_path):
    path = tmp_path / "bad.crn"
    path.write_text("A -> B @ 1\nA + -> B @ 1\n")
    code, _, err = call("crn", "analyze", str(path))
    assert code == 2 and "line 2, column 5" in err


def test_null_event_exits_1():
    code, _, err = call("stats", "--matrix", "2", "--lambda", "1", "--b", "3")
    assert code == 1 and "probability zero" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "condpoisson", "f0", "--matrix", "1 1", "--lambda", "1,1",
                           "--b", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "F0(2) = 2/1 ~ 2"
