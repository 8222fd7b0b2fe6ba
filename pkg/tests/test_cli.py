import json
import subprocess
import sys

import pytest

from supergc.cli import FAIL, INPUT, OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_canon(capsys):
    code, out, _ = run(capsys, "canon", "--expr", "D+(θ+*θ-)")
    assert code == OK and out.strip() == "θ-"
    code, out, _ = run(capsys, "canon", "--expr", "θ+^2", "--json")
    assert json.loads(out) == {"canonical": "0", "input": "θ+^2"}


def test_canon_in_scenario(capsys):
    code, out, _ = run(capsys, "canon", "--scenario", "example3", "--epsilon", "1",
                       "--expr", "~C0+*~C0+")
    assert code == OK and out.strip() == "0"


def test_syntax_error_is_input_error(capsys):
    code, _, err = run(capsys, "canon", "--expr", "1 + * 2")
    assert code == INPUT
    assert "1:5" in err


def test_bad_flags(capsys):
    assert run(capsys, "table", "--algebra", "nope")[0] == INPUT
    assert run(capsys, "verify", "--scenario", "example3", "--epsilon", "3")[0] == INPUT
    assert run(capsys)[0] == INPUT


def test_verify_pass_and_fail(capsys):
    assert run(capsys, "verify", "--scenario", "example3")[0] == OK
    assert run(capsys, "verify", "--scenario", "corrupted-example1")[0] == OK
    code, out, _ = run(capsys, "verify", "--scenario", "classical-L17", "--epsilon", "1")
    assert code == FAIL
    assert "Gauss" in out


def test_verify_unknown_scenario(capsys):
    code, _, err = run(capsys, "verify", "--scenario", "nope")
    assert code == INPUT and "nope" in err


def test_verify_epsilon_not_declared(capsys):
    assert run(capsys, "verify", "--scenario", "example4", "--epsilon", "1")[0] == INPUT


def test_verify_file_path(capsys, tmp_path):
    p = tmp_path / "zero.toml"
    p.write_text('system = "classical"\n[bindings]\nu = "0"\nQ = "0"\nQb = "0"\nH = "0"\n'
                 '[expect]\npass = true\n')
    assert run(capsys, "verify", "--scenario", str(p))[0] == OK


def test_verify_json_deterministic(capsys):
    _, a, _ = run(capsys, "verify", "--scenario", "example4", "--json")
    _, b, _ = run(capsys, "verify", "--scenario", "example4", "--json")
    assert a == b
    rep = json.loads(a)
    assert rep["verify"]["pass"] is True
    assert list(rep) == sorted(rep)


@pytest.mark.parametrize("name", ["bosonic", "fermionic", "fermionic-constf",
                                  "classical-finite"])
def test_table(capsys, name):
    code, out, _ = run(capsys, "table", "--algebra", name)
    assert code == OK
    assert "golden diff: 0 of" in out


def test_table_json(capsys):
    code, out, _ = run(capsys, "table", "--algebra", "bosonic", "--json")
    rep = json.loads(out)
    assert code == OK and rep["diff"]["diffs"] == [] and rep["jacobi"] == 0


def test_adjoint(capsys):
    code, out, _ = run(capsys, "adjoint", "--algebra", "bosonic", "--X", "alpha*K1b",
                       "--Y", "P+", "--orientation", "-1")
    assert code == OK and out.strip() == "(exp(-2*alpha))*P+"


@pytest.mark.parametrize("key", ["bosonic", "fermionic"])
def test_adjoint_worked(capsys, key):
    code, out, _ = run(capsys, "adjoint", "--worked", key)
    assert code == OK and "match" in out


def test_adjoint_errors(capsys):
    assert run(capsys, "adjoint", "--worked", "9.9")[0] == INPUT
    assert run(capsys, "adjoint", "--algebra", "bosonic")[0] == INPUT
    assert run(capsys, "adjoint", "--algebra", "bosonic", "--X", "a*J+", "--Y", "P+")[0] == INPUT
    code, _, _ = run(capsys, "adjoint", "--algebra", "classical-finite", "--X", "e1 + e5",
                     "--Y", "e3")
    assert code == FAIL


def test_curvature(capsys):
    code, out, _ = run(capsys, "curvature", "--scenario", "example3", "--epsilon", "1",
                       "--json")
    assert code == OK and json.loads(out)["gaussian"] == "0"


def test_subalgebras(capsys):
    code, out, _ = run(capsys, "subalgebras", "--list", "h")
    assert code == OK and "199/199 entries valid" in out
    code, out, _ = run(capsys, "subalgebras", "--list", "g", "--id", "g39", "--json")
    assert code == OK and json.loads(out)["id"] == "g39"
    assert run(capsys, "subalgebras", "--list", "g", "--id", "g1000")[0] == INPUT
    assert run(capsys, "subalgebras", "--conjugations")[0] == OK


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "supergc", "canon", "--expr", "θ-*θ+"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "-θ+*θ-"
