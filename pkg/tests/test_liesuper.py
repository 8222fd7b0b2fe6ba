import pytest

from supergc import EVEN, I, ODD, Func, ParityError, constant
from supergc.liesuper import (ALGEBRAS, WORKED_ORBITS, AdjointError, SubalgebraEntry,
                              adjoint_action, adjoint_series, algebra, chart,
                              conjugacy_spot_check, decomposition_report, envelope_bracket,
                              field, format_combination, format_element, load_conjugations,
                              load_golden, load_subalgebras, orbit_report, parse_combination,
                              parse_element, super_bracket, table_diff, validate_entry,
                              virasoro_check)
from supergc.parser import standard_env


@pytest.fixture
def env():
    return standard_env(auto=True)


def el(text, alg, env):
    return parse_element(text, algebra(alg), env)


# vector fields --------------------------------------------------------------------

def test_field_parity_and_action():
    ch = chart("bosonic")
    X = field("bosonic", phi=1)
    assert X.parity == EVEN
    assert X(ch["phi"] * ch["phi"]) == 2 * ch["phi"]
    J = field("fermionic", **{"θ+": 1})
    assert J.parity == ODD


def test_mixed_field_rejected():
    with pytest.raises(ParityError):
        field("bosonic", phi=1, **{"θ+": 1})


def test_bracket_of_odd_fields_is_anticommutator():
    th = chart("bosonic")["θ+"]
    # J = d_θ + iθ d_x squares to i d_x, so {J, J} = 2i d_x
    J = field("bosonic", **{"θ+": 1, "x+": I * th})
    assert super_bracket(J, J) == field("bosonic", **{"x+": 2 * I})


# tables -----------------------------------------------------------------------------

@pytest.mark.parametrize("name,cells", [("bosonic", 64), ("fermionic", 81),
                                        ("fermionic-constf", 64), ("classical-finite", 49)])
def test_golden_tables(name, cells):
    d = table_diff(name)
    assert d["cells"] == cells
    assert d["diffs"] == []
    assert d["pass"]


@pytest.mark.parametrize("name", ALGEBRAS)
def test_antisymmetry_and_jacobi(name):
    alg = algebra(name)
    assert alg.antisymmetry_residuals() == []
    assert alg.jacobi_residuals() == []


@pytest.mark.parametrize("name", ALGEBRAS)
def test_decompositions(name):
    assert decomposition_report(name)["pass"]


def test_named_brackets():
    g, h = algebra("g"), algebra("h")
    assert format_combination(g.bracket("K1b", "P+"), g.names) == "2P+"
    assert format_combination(g.bracket("J+", "J+"), g.names) == "2iP+"
    assert format_combination(h.bracket("K0", "W"), h.names) == "W"


def test_centers():
    assert algebra("bosonic").center() == ["K0", "C0"]
    assert algebra("fermionic").center() == []
    assert algebra("classical-finite").center() == ["e0"]


def test_aliases():
    assert algebra("g") is algebra("bosonic")
    assert algebra("h").name == "fermionic"
    with pytest.raises(KeyError):
        algebra("nope")


def test_cell_round_trip():
    g = algebra("bosonic")
    for row in load_golden("bosonic")["rows"]:
        for cell in row:
            assert format_combination(parse_combination(cell, g.names), g.names) == cell


def test_virasoro():
    rep = virasoro_check()
    assert rep["pass"], rep
    assert rep["finite"]["[e1,e5]"] == "0"
    assert rep["e0_central"]


def test_virasoro_with_other_symbols():
    assert virasoro_check(Func("a1"), Func("a2"), Func("b1"), Func("b2"))["pass"]


# envelope and adjoint action -------------------------------------------------------------

def test_envelope_sign(env):
    g = algebra("g")
    X = el("~eta*J+", "g", env)
    Y = el("~nu*J+", "g", env)
    eta, nu = constant("eta", ODD), constant("nu", ODD)
    # [ηJ+, νJ+] = -ην{J+,J+} = -2iην P+
    assert envelope_bracket(g, X, Y) == {"P+": -2 * I * eta * nu}


def test_element_parity_checked(env):
    with pytest.raises(ParityError):
        el("a*J+", "g", env)


def test_dilation_orbit(env):
    g = algebra("g")
    X = el("alpha*K1b + delta*K2b", "g", env)
    Y = el("P+ + a*P-", "g", env)
    for s in (1, -1):
        want = el(f"exp({2 * s}*alpha)*P+ + exp({2 * s}*delta)*a*P-", "g", env)
        assert adjoint_action(g, X, Y, s).result == want


def test_zero_generator(env):
    g = algebra("g")
    Y = el("K2b + a*P+ + ~rho*J-", "g", env)
    assert adjoint_action(g, {}, Y).result == Y


def test_linear_in_Y(env):
    g = algebra("g")
    X = el("alpha*K1b + beta*P+ + ~eta*J+ + delta*K2b + lambda*P- + ~rho*J-", "g", env)
    Y1, Y2 = el("K2b", "g", env), el("P+ + ~nu*J+", "g", env)
    c = constant("c")
    both = {k: Y1.get(k, 0) + c * Y2.get(k, 0) for k in set(Y1) | set(Y2)}
    lhs = adjoint_action(g, X, both).result
    r1, r2 = adjoint_action(g, X, Y1).result, adjoint_action(g, X, Y2).result
    rhs = {k: r1.get(k, 0) + c * r2.get(k, 0) for k in set(r1) | set(r2)}
    assert {k: v for k, v in lhs.items() if v} == {k: v for k, v in rhs.items() if v}


@pytest.mark.parametrize("s", [1, -1])
def test_nilpotent_orbit_matches_series(env, s):
    g = algebra("g")
    X = el("beta*P+ + ~eta*J+ + lambda*P- + ~rho*J-", "g", env)
    Y = el("K1b + K2b", "g", env)
    exact = adjoint_action(g, X, Y, s).result
    series = adjoint_series(g, X, Y, s, order=6)
    assert exact == {k: v for k, v in series.items() if v}


def test_fermionic_nilpotent_orbit_matches_series(env):
    h = algebra("h")
    X = el("beta*P+ + ~eta*J+ + ~tau*W", "h", env)
    Y = el("K1f + K0 + ~zeta*W", "h", env)
    exact = adjoint_action(h, X, Y).result
    series = adjoint_series(h, X, Y, order=6)
    assert exact == {k: v for k, v in series.items() if v}


def test_cyclic_generator_rejected(env):
    alg = algebra("classical-finite")
    with pytest.raises(AdjointError):
        adjoint_action(alg, el("e1 + e5", "classical-finite", env),
                       el("e3", "classical-finite", env))


@pytest.mark.parametrize("key,orientation", [("bosonic", -1), ("fermionic", 1)])
def test_worked_orbits(key, orientation):
    rep = orbit_report(key)
    assert rep["orientations"] == [orientation]
    assert rep["pass"]


def test_worked_orbit_keys():
    assert set(WORKED_ORBITS) == {"bosonic", "fermionic"}


def test_format_element(env):
    g = algebra("g")
    assert format_element(el("-P+ + 2*a*P-", "g", env), g) == "-P+ + (2*a)*P-"


# classification data ---------------------------------------------------------------------

@pytest.mark.parametrize("which,count", [("g", 99), ("h", 199), ("classical", 16)])
def test_subalgebra_lists(which, count):
    entries = load_subalgebras(which)
    assert len(entries) == count
    assert len({e.id for e in entries}) == count
    bad = [r for r in map(validate_entry, entries) if not r["pass"]]
    assert bad == []


def test_bad_entries_rejected():
    wrong = SubalgebraEntry("x", "bosonic", [{"basis": "J+", "parameter": "a",
                                              "parity": "odd"}], [])
    assert not validate_entry(wrong)["pass"]
    unknown = SubalgebraEntry("y", "bosonic", [{"basis": "Z9", "parameter": "1",
                                                "parity": "even"}], [])
    assert not validate_entry(unknown)["pass"]
    mislabeled = SubalgebraEntry("z", "bosonic", [{"basis": "P+", "parameter": "1",
                                                   "parity": "odd"}], [])
    assert not validate_entry(mislabeled)["parity"]


def test_unknown_list():
    with pytest.raises(KeyError):
        load_subalgebras("q")


def test_conjugations():
    checks = load_conjugations()
    ids = {c["id"] for c in checks}
    assert {"g14", "h14", "g13"} <= ids
    for c in checks:
        rep = conjugacy_spot_check(c)
        assert rep["pass"], rep


def test_identity_conjugation():
    rep = conjugacy_spot_check({"id": "g14", "algebra": "bosonic", "X": "0",
                                "Y": "P+ + eps*P-", "normalize": "P+",
                                "cases": [{"values": {}, "expect": "P+ + eps*P-"}]})
    assert rep["pass"]


def test_failing_conjugation_reported():
    rep = conjugacy_spot_check({"id": "bad", "algebra": "bosonic", "X": "alpha*K1b",
                                "Y": "P+ + a*P-", "normalize": "P+",
                                "cases": [{"values": {}, "expect": "P+ + a*P-"}]})
    assert not rep["pass"]
    assert rep["cases"][0]["residual"] != "0"
