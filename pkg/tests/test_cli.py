import json
import subprocess
import sys
from fractions import Fraction

import pytest

from sprounding.cli import main
from sprounding.graph import parse_graph, verify_rounding, rounding_from_json

STAR = "0 1 1/2\n0 2 1/2\n0 3 1/2\n"
PATH2 = "0 1 1/2\n1 2 0.5\n"
SAMPLE = "c three clauses over four variables\np cnf 4 3\n1 2 -3 0\n1 3 -4 0\n-1 -3 4 0\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_decide_star(capsys, files):
    star = files("star.tree", STAR)
    assert run(capsys, "decide", "--epsilon", "1", star)[:2] == (1, "no\n")
    code, out, _ = run(capsys, "decide", "--epsilon", "1", "--mode", "closed", "--show-ranges", star)
    assert code == 0 and out.splitlines() == ["yes", "[-1/2, 0]", "[0, 1/2]"]
    assert run(capsys, "decide", "--epsilon", "2", star)[0] == 0


def test_decide_root_choice(capsys, files):
    path = files("p.tree", PATH2)
    code, out, _ = run(capsys, "decide", "--epsilon", "1", "--root", "1", "--show-ranges", path)
    assert code == 0 and out.splitlines() == ["yes", "[-1/2, 1/2]"]


def test_minimize_two_halves(capsys, files):
    code, out, _ = run(capsys, "minimize", files("p.tree", PATH2))
    data = json.loads(out)
    assert code == 0 and data["epsilon"] == "1/2"
    assert sorted(x for _, _, x in data["rounding"]) == [0, 1]


def test_round_and_verify(capsys, files):
    path = files("p.tree", PATH2)
    code, out, _ = run(capsys, "round", "--epsilon", "1", path)
    assert code == 0
    rfile = files("r.json", out)
    code, out, _ = run(capsys, "verify", "--epsilon", "1", "--level", "oblivious", "--format", "json", path, rfile)
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["level"] == "path_oblivious"
    assert Fraction(report["worst_error"]) == Fraction(1, 2)


def test_round_none(capsys, files):
    code, out, _ = run(capsys, "round", "--epsilon", "1", files("s.tree", STAR))
    assert code == 1 and json.loads(out)["rounding"] is None


def test_verify_failure_text(capsys, files):
    star = files("s.tree", STAR)
    rfile = files("r.json", "[[0,1,0],[0,2,0],[0,3,0]]")
    code, out, _ = run(capsys, "verify", "--epsilon", "1", star, rfile)
    assert code == 1 and "passed: no" in out and "witness:" in out


def test_verify_bad_rounding(capsys, files):
    star = files("s.tree", STAR)
    code, _, err = run(capsys, "verify", "--epsilon", "1", star, files("r.json", "[[0,1,0]]"))
    assert code == 2 and "bad rounding" in err


def test_path(capsys, files):
    code, out, _ = run(capsys, "path", files("w.txt", "1/2 1/2 1/2"))
    assert code == 0 and json.loads(out)["rounded"] == [1, 0, 1]


def test_oracle_commands(capsys, files):
    star = files("s.tree", STAR)
    code, out, _ = run(capsys, "oracle", "decide", star, "--epsilon", "1", "--level", "oblivious")
    assert code == 1 and json.loads(out)["admits"] is False
    code, out, _ = run(capsys, "oracle", "min-eps", star)
    assert code == 0 and json.loads(out)["epsilon"] == "1"
    code, out, _ = run(capsys, "oracle", "solve", star, "--epsilon", "1", "--mode", "closed", "--pin", "0,1=up")
    data = json.loads(out)
    assert code == 0 and [0, 1, 1] in data["rounding"]
    code, _, err = run(capsys, "oracle", "decide", star, "--epsilon", "1", "--budget", "3")
    assert code == 2 and "budget" in err
    assert run(capsys, "oracle", "decide", star)[0] == 2


def test_reduce_roundtrip(capsys, files, tmp_path):
    cnf = files("sample.cnf", SAMPLE)
    g_path, s_path, r_path = (str(tmp_path / n) for n in ("g.txt", "s.json", "r.json"))
    code, _, _ = run(capsys, "reduce", cnf, "-o", g_path, "--sidecar", s_path, "--assignment", "0110", "--rounding", r_path)
    assert code == 0
    graph = parse_graph(open(g_path).read())
    assert json.load(open(s_path))["D"] == "35"
    assert verify_rounding(graph, rounding_from_json(json.load(open(r_path))), 1).passed
    assert run(capsys, "verify", "--epsilon", "1", g_path, r_path)[0] == 0
    code, out, _ = run(capsys, "decode", g_path, s_path, r_path)
    assert json.loads(out)["assignment"] == {"1": 0, "2": 1, "3": 1, "4": 0}
    # unsatisfying choice for x2 breaks clause 1
    run(capsys, "reduce", cnf, "-o", g_path, "--assignment", "0,0,1,0", "--rounding", r_path)
    assert run(capsys, "verify", "--epsilon", "1", g_path, r_path)[0] == 1


def test_reduce_pads_fresh_variables(capsys, files, tmp_path):
    cnf = files("dup.cnf", "p cnf 2 1\n1 1 2 0\n")
    r_path = str(tmp_path / "r.json")
    code, out, _ = run(capsys, "reduce", cnf, "--assignment", "10", "--rounding", r_path)
    assert code == 0
    graph = parse_graph(out)
    assert verify_rounding(graph, rounding_from_json(json.load(open(r_path))), 1).passed


def test_reduce_usage_errors(capsys, files):
    cnf = files("sample.cnf", SAMPLE)
    assert run(capsys, "reduce", cnf, "--assignment", "01")[0] == 2
    assert run(capsys, "reduce", files("bad.cnf", "1 2 0"))[0] == 2


def test_gen_reproducible(capsys):
    a = run(capsys, "gen", "--seed", "7", "-n", "12")[1]
    b = run(capsys, "gen", "--seed", "7", "-n", "12")[1]
    c = run(capsys, "gen", "--seed", "8", "-n", "12")[1]
    assert a == b != c
    g = parse_graph(a)
    assert g.is_tree() and g.vertex_count == 12
    assert all(w.denominator <= 100 for w in g.edges.values())
    words = run(capsys, "gen", "--kind", "path", "-n", "5")[1].split()
    assert len(words) == 5


@pytest.mark.parametrize("argv", [
    ["decide", "x.tree"],
    ["decide", "--epsilon", "abc", "x.tree"],
    ["verify", "--epsilon", "1", "--level", "medium", "a", "b"],
    ["nosuch"],
    [],
])
def test_usage_errors_exit_two(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_input_errors_exit_two(capsys, files):
    assert run(capsys, "decide", "--epsilon", "1", files("bad.tree", "0 0 1\n"))[0] == 2
    assert run(capsys, "decide", "--epsilon", "1", files("cyc.tree", "0 1 1\n1 2 1\n0 2 1\n"))[0] == 2
    assert run(capsys, "decide", "--epsilon", "0", files("s.tree", STAR))[0] == 2
    assert run(capsys, "decide", "--epsilon", "1", "/nonexistent/file")[0] == 2
    assert run(capsys, "decide", "--epsilon", "1", "--root", "9", files("s.tree", STAR))[0] == 2


def test_module_entry_point_stdin():
    proc = subprocess.run(
        [sys.executable, "-m", "sprounding", "decide", "--epsilon", "1", "-"],
        input=STAR, capture_output=True, text=True,
    )
    assert proc.returncode == 1 and proc.stdout == "no\n"
