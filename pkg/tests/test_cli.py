import json
import subprocess
import sys

import pytest

from amalgam.cli import main
from amalgam.core import CAUSAL, COARSER_ORDER, POSETS
from amalgam.jsonio import structure_from_json, theory_to_json


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj), encoding="utf-8")
    return str(p)


CAUSAL_V = {
    "A": {"universe": ["a", "c"], "leq": [["a", "a"], ["c", "c"], ["a", "c"]], "ll": [["a", "c"]]},
    "B": {"universe": ["b", "c"], "leq": [["b", "b"], ["c", "c"], ["c", "b"]]},
    "C": {"universe": ["c"], "leq": [["c", "c"]]},
}


@pytest.fixture
def causal(tmp_path):
    return _write(tmp_path, "t.json", theory_to_json(CAUSAL)), _write(tmp_path, "v.json", CAUSAL_V)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith(("{", "[")) else out)


def test_amalgamate_and_verify(tmp_path, causal, capsys):
    t, v = causal
    out_path = str(tmp_path / "w.json")
    code, w = run(["amalgamate", v, "--theory", t, "--out", out_path], capsys)
    assert code == 0
    assert sorted(map(tuple, w["D"]["ll"])) == [("a", "b"), ("a", "c")]
    code, rep = run(["verify", v, out_path, "--theory", t, "--level", "super"], capsys)
    assert code == 0 and rep["ok"]
    code, w2 = run(["amalgamate", v, "--theory", t, "--mode", "oracle"], capsys)
    assert code == 0


def test_validate_a1_failure(tmp_path, capsys):
    s = _write(tmp_path, "s.json", {"universe": ["w", "x", "y"],
                                    "leq": [["w", "w"], ["x", "x"], ["y", "y"], ["w", "x"]],
                                    "ll": [["x", "y"]]})
    t = _write(tmp_path, "t.json", {"P": [2, 5], "N": ["A1"]})
    code, rep = run(["validate", s, "--theory", t], capsys)
    assert code == 1
    assert rep["violations"][0] == {"axiom": "A1", "witness": ["w", "x", "y"]}


def test_search_exit_codes(tmp_path, causal, capsys):
    t, v = causal
    assert run(["search", v, "--theory", t], capsys)[0] == 0
    assert main(["fixture", "run", "urquhart-5.1"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["outcome"] == "EXHAUSTED" and out["result"]["genuine"]


def test_time_budget_exit(tmp_path, capsys):
    from amalgam.core import URQUHART
    from amalgam.fixtures import fixture
    from amalgam.jsonio import vformation_to_json

    v = _write(tmp_path, "v.json", vformation_to_json(fixture("urquhart-5.1").vformation))
    t = _write(tmp_path, "t.json", theory_to_json(URQUHART))
    code = main(["search", v, "--theory", t, "--level", "ap", "--identify", "--extra", "2",
                 "--time-budget", "0.000000001"])
    assert code == 3


@pytest.mark.parametrize("content,code", [
    ("{not json", 2),
    (json.dumps({"P": [9]}), 2),
])
def test_input_errors(tmp_path, causal, content, code, capsys):
    _, v = causal
    p = tmp_path / "bad.json"
    p.write_text(content, encoding="utf-8")
    assert main(["amalgamate", v, "--theory", str(p)]) == code
    assert "input error" in capsys.readouterr().err


def test_usage_error_and_missing_file(capsys):
    assert main(["amalgamate"]) == 2
    assert main(["validate", "/nonexistent.json", "--theory", "/nonexistent.json"]) == 2
    assert main(["fixture", "run", "nope"]) == 2


def test_inadmissible_theory_exit(tmp_path, causal, capsys):
    _, v = causal
    t = _write(tmp_path, "t.json", {"Q": [5], "N": ["F", "A2"]})
    assert main(["amalgamate", v, "--theory", t]) == 2


def test_lift_and_linearize(tmp_path, capsys):
    d = _write(tmp_path, "d.json", {"universe": ["a", "c"], "leq": [["a", "a"], ["c", "c"], ["a", "c"]],
                                    "ll": [["a", "c"]]})
    e = _write(tmp_path, "e.json", {"universe": ["a", "c", "e"],
                                    "pairs": [["a", "a"], ["c", "c"], ["e", "e"], ["a", "c"], ["c", "e"],
                                              ["a", "e"]]})
    t = _write(tmp_path, "t.json", theory_to_json(CAUSAL))
    code, s = run(["lift", d, e, "--theory", t], capsys)
    assert code == 0 and ["a", "e"] in s["ll"]
    code, lin = run(["linearize", e], capsys)
    assert code == 0 and len(lin["pairs"]) == 6
    bad = _write(tmp_path, "r.json", {"universe": ["a", "b"], "pairs": [["a", "b"], ["b", "a"]]})
    assert main(["linearize", bad]) == 2


def test_linearize_pipeline(tmp_path, capsys):
    v = _write(tmp_path, "v.json", {
        "A": {"universe": ["a", "c"], "leq": [["a", "a"], ["c", "c"], ["a", "c"]],
              "ll": [["a", "a"], ["c", "c"], ["a", "c"]]},
        "B": {"universe": ["b", "c"], "leq": [["b", "b"], ["c", "c"]], "ll": [["b", "b"], ["c", "c"], ["b", "c"]]},
        "C": {"universe": ["c"], "leq": [["c", "c"]], "ll": [["c", "c"]]},
    })
    t = _write(tmp_path, "t.json", theory_to_json(COARSER_ORDER))
    code, w = run(["linearize-pipeline", v, "--theory", t], capsys)
    assert code == 0 and ["a", "b"] in w["D"]["ll"]


def test_fraisse_subcommands(tmp_path, capsys):
    t = _write(tmp_path, "t.json", theory_to_json(POSETS))
    main(["fraisse", "enumerate", "--theory", t, "--size", "3"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5
    assert all(structure_from_json(json.loads(x)).n == 3 for x in lines)
    code, rep = run(["fraisse", "check-ap", "--theory", t, "--size", "2", "--level", "super"], capsys)
    assert code == 0 and rep["ok"]
    tc = _write(tmp_path, "tc.json", theory_to_json(COARSER_ORDER))
    code, out = run(["fraisse", "saturate", "--theory", tc, "--level", "1", "--budget", "8"], capsys)
    assert code == 1 and not out["complete"] and out["unrealized"]


def test_fixture_list_and_export(tmp_path, capsys):
    code, lst = run(["fixture", "list"], capsys)
    assert code == 0 and len(lst) == 8
    code, paths = run(["fixture", "export", str(tmp_path / "fx")], capsys)
    assert code == 0 and len(paths) == 8


def test_emitted_structures_reparse(tmp_path, causal, capsys):
    t, v = causal
    _, w = run(["amalgamate", v, "--theory", t], capsys)
    s = structure_from_json(w["D"])
    assert structure_from_json(json.loads(json.dumps(w["D"]))) == s


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "amalgam", "fixture", "list"], capture_output=True, text=True)
    assert out.returncode == 0
    assert len(json.loads(out.stdout)) == 8
