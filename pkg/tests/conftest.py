import pytest

from supergc import ODD, constant, coordinate
from supergc.sampling import RandomExprs


@pytest.fixture
def rand():
    return RandomExprs(seed=1234)


@pytest.fixture
def odd():
    """A few odd constants in canonical order after the theta coordinates."""
    return {n: constant(n, ODD) for n in ("γ", "δ", "ξ1", "ξ2")}


@pytest.fixture
def phi_parts():
    """u, γ, δ, v of the expansion u + θ+γ + θ-δ + θ+θ-v."""
    return constant("u"), constant("γ", ODD), constant("δ", ODD), constant("v")


@pytest.fixture
def x():
    return coordinate("x")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
