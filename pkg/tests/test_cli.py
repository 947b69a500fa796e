import json
import shutil
import subprocess
import sys

import pytest

from helpers import C4_PATH
from stablemenus.cli import SCHEMA_VERSION, run
from stablemenus.model import load_problem


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def invoke_json(capsys, *argv):
    code, out, err = invoke(capsys, "--json", *argv)
    return code, json.loads(out) if out else None, err


@pytest.fixture
def table1(tmp_path, capsys):
    path = tmp_path / "a.json"
    assert invoke(capsys, "generate", "table1", "--x", 1, "-o", path)[0] == 0
    return path


@pytest.fixture
def cycle4(tmp_path, capsys):
    path = tmp_path / "b.json"
    assert invoke(capsys, "generate", "c4cycle", "--t", 2, "-o", path)[0] == 0
    return path


def test_enumerate_table1_is_empty(capsys, table1):
    code, report, _ = invoke_json(capsys, "enumerate", table1, "--t", 12, "--u", 23)
    assert code == 0
    assert report["stable_menus"] == []
    assert report["schema_version"] == SCHEMA_VERSION


def test_greedy_cycle_transcript(capsys, cycle4):
    code, report, _ = invoke_json(capsys, "greedy", cycle4, "--t", 2, "--u", 3)
    assert code == 0
    assert report["outcome"] == "cycle"
    steps = report["prefix"] + report["cycle"]
    menus = [tuple(steps[0]["from"])] + [tuple(s["to"]) for s in steps]
    assert menus == C4_PATH
    assert report["recovered"] == [[1, 3], [2, 4]]
    code, out, _ = invoke(capsys, "greedy", cycle4, "--t", 2, "--u", 3)
    assert "{1} -+2-> {1,2}" in out


def test_check_menu_out_of_range_is_usage_error(capsys, cycle4):
    code, out, err = invoke(capsys, "check", cycle4, "--t", 2, "--u", 3, "--menu", "1,5")
    assert code == 2
    assert "out of range" in err
    assert invoke(capsys, "check", cycle4, "--t", 2, "--u", 3, "--menu", "one")[0] == 2


def test_check_reports_verdict(capsys, cycle4):
    code, report, _ = invoke_json(capsys, "check", cycle4, "--t", 2, "--u", 3, "--menu", "1,2")
    assert code == 0
    assert report["stable"] is False
    assert report["feasibility_violations"] == [[1, 1]]
    code, out, _ = invoke(capsys, "check", cycle4, "--t", 2, "--u", 3, "--menu", "none")
    assert out.startswith("menu {}: not stable")


def test_solve_exit_codes(capsys, table1, cycle4):
    code, report, _ = invoke_json(capsys, "solve", table1, "--t", 12, "--u", 23)
    assert code == 1
    assert report["ok"] is False and report["reason"] == "NoStableMenu"
    code, report, _ = invoke_json(capsys, "solve", cycle4, "--t", 2, "--u", 3, "--method", "gminus2")
    assert code == 0 and report["verdict"]["stable"]


def test_usage_errors(capsys, tmp_path, cycle4):
    assert invoke(capsys)[0] == 2
    assert invoke(capsys, "enumerate", cycle4, "--t", 0, "--u", 3)[0] == 2
    assert invoke(capsys, "enumerate", tmp_path / "missing.json", "--t", 1, "--u", 1)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_goods": 2, "agents": [{"count": 1, "prefs": [1, 1]}]}')
    code, _, err = invoke(capsys, "enumerate", bad, "--t", 1, "--u", 1)
    assert code == 2 and "group 0" in err
    assert invoke(capsys, "reduce", cycle4, "--kind", "embed")[0] == 2
    assert invoke(capsys, "generate", "g2lower", "--t", 2, "--u", 2)[0] == 2


def test_reduce_kinds(capsys, cycle4):
    code, report, _ = invoke_json(capsys, "reduce", cycle4, "--kind", "embed", "--u", 3)
    assert code == 0 and report["added"] == 5 and report["reduced"]["num_goods"] == 5
    code, report, _ = invoke_json(capsys, "reduce", cycle4, "--kind", "popular", "--t", 1)
    assert report["forced"] == [1, 2, 3, 4]
    code, report, _ = invoke_json(capsys, "reduce", cycle4, "--kind", "rare", "--t", 2)
    assert report["labels"] == [1, 2, 3, 4]


def test_generate_to_stdout_round_trips(capsys, tmp_path):
    code, out, _ = invoke(capsys, "generate", "random", "--g", 4, "--n", 9, "--seed", 3, "--complete")
    assert code == 0
    path = tmp_path / "r.json"
    path.write_text(out)
    p = load_problem(str(path))
    assert p.n == 9 and p.is_complete()


@pytest.mark.parametrize(
    "argv",
    [
        ["g2lower", "--t", 3, "--u", 2],
        ["cyclic3", "--t", 2, "--u", 2],
        ["table1-complete", "--x", 1, "--seed", 4],
        ["appendixB", "--which", "B"],
        ["structured", "--g", 5, "--t", 3],
    ],
)
def test_generate_families(capsys, argv):
    code, report, _ = invoke_json(capsys, "generate", *argv)
    assert code == 0 and report["instance"]["agents"]


def test_gap_and_mechanism(capsys, table1, cycle4):
    assert invoke_json(capsys, "gap", table1, "--t", 12, "--u", 23, "--k", 3)[1]["gap"] is True
    code, report, _ = invoke_json(capsys, "mechanism", cycle4, "--t", 2, "--u", 3, "--mech", "default")
    assert code == 0 and report["menu"] == [1, 3]
    code, report, _ = invoke_json(capsys, "mechanism", cycle4, "--t", 2, "--u", 3, "--mech", "g2")
    assert code == 1 and report["reason"] == "MechanismNotApplicable"
    assert invoke_json(capsys, "mechanism", table1, "--t", 12, "--u", 23)[0] == 1


def test_manipulate(capsys):
    code, report, _ = invoke_json(capsys, "manipulate", "--mech", "default", "--g", 3, "--n", 3, "--t", 2, "--u", 3)
    assert code == 0 and len(report["witnesses"]) >= 1
    code, report, _ = invoke_json(capsys, "manipulate", "--mech", "g2", "--g", 2, "--n", 4, "--t", 2, "--u", 2)
    assert code == 0 and report["witnesses"] == []


def test_encode_and_decode(capsys, tmp_path):
    smt = tmp_path / "f.smt2"
    code, _, _ = invoke(capsys, "encode-smt", "--g", 3, "--ratio", "1:2", "-o", smt)
    assert code == 0 and "(set-logic QF_LIA)" in smt.read_text()
    assert invoke(capsys, "encode-smt", "--g", 3, "--ratio", "x")[0] == 2
    assert invoke(capsys, "encode-smt", "--g", 9)[0] == 2
    model = tmp_path / "m.txt"
    values = {"x_0": 0, "x_1": 2, "x_2": 0, "x_3": 0, "x_4": 0, "t": 3, "u": 2}
    model.write_text("sat\n(" + "".join(f"(define-fun {k} () Int {v})" for k, v in values.items()) + ")")
    code, report, _ = invoke_json(capsys, "decode-model", model, "--g", 2)
    assert code == 0
    assert (report["t"], report["u"]) == (3, 2)
    assert report["instance"]["agents"] == [{"count": 2, "prefs": [1]}]
    assert report["stable_menus"] == []
    model.write_text("sat\n()")
    assert invoke(capsys, "decode-model", model, "--g", 2)[0] == 1


def test_json_output_is_byte_identical(capsys, cycle4):
    argv = ["--json", "greedy", str(cycle4), "--t", "2", "--u", "3"]
    outputs = [invoke(capsys, *argv)[1] for _ in range(3)]
    assert outputs[0] == outputs[1] == outputs[2]
    argv_after = ["greedy", str(cycle4), "--t", "2", "--u", "3", "--json"]
    assert invoke(capsys, *argv_after)[1] == outputs[0]


def test_module_entry_point(cycle4):
    proc = subprocess.run(
        [sys.executable, "-m", "stablemenus", "enumerate", str(cycle4), "--t", "2", "--u", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "{1,3}" in proc.stdout
    if shutil.which("stablemenus"):
        again = subprocess.run(["stablemenus", "enumerate", str(cycle4), "--t", "2", "--u", "3"], capture_output=True, text=True)
        assert again.stdout == proc.stdout
