"""Randomized invariants of the expression engine, 1000 cases per property."""

import functools
import operator

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from supergc import (EVEN, ODD, TM, TP, XM, XP, Func, apply_D, constant, diff, diff_odd, exp,
                     parse, standard_env, to_text)
from supergc.sampling import RandomExprs

CASES = settings(max_examples=1000, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

ODD_ATOMS = [TP, TM] + [constant(n, ODD) for n in ("μ", "ν", "ρ")]
EVEN_ATOMS = [XP, XM, constant("a"), constant("b"), Func("u", EVEN, 2)(XP, XM)]


@st.composite
def factors(draw):
    picks = draw(st.lists(st.tuples(st.booleans(), st.integers(0, 4),
                                    st.integers(-3, 3).filter(bool)), min_size=1, max_size=6))
    out = []
    for odd, i, c in picks:
        e = ODD_ATOMS[i] if odd else EVEN_ATOMS[i]
        out.append((c * e, ODD if odd else EVEN))
    return out


def product(fs):
    return functools.reduce(operator.mul, (e for e, _ in fs))


@CASES
@given(factors(), st.randoms(use_true_random=False))
def test_canonical_form_unique_under_reordering(fs, rnd):
    """Shuffle factors with the sign of the permutation, reassociate, shuffle summands."""
    base = product(fs)
    items = list(fs)
    sign = 1
    for _ in range(len(items) * 2):
        if len(items) < 2:
            break
        k = rnd.randrange(len(items) - 1)
        (a, pa), (b, pb) = items[k], items[k + 1]
        if pa and pb:
            sign = -sign
        items[k], items[k + 1] = items[k + 1], items[k]
    # right-nested association instead of left
    nested = functools.reduce(lambda acc, f: f[0] * acc, reversed(items[:-1]), items[-1][0])
    assert sign * nested == base
    assert to_text(sign * nested) == to_text(base)
    terms = [e for e, _ in fs]
    rnd.shuffle(terms)
    assert sum(terms[1:], terms[0]) == sum((e for e, _ in fs[1:]), fs[0][0])


@CASES
@given(seeds)
def test_graded_leibniz(seed):
    r = RandomExprs(seed)
    h, g = r.homogeneous(), r.homogeneous()
    sign = (-1) ** h.parity
    for th in (TP, TM):
        assert not diff_odd(h * g, th) - diff_odd(h, th) * g - sign * h * diff_odd(g, th)
    lhs = apply_D("+", h * g)
    assert lhs == apply_D("+", h) * g + sign * h * apply_D("+", g)


@CASES
@given(seeds)
def test_derivative_anticommutation(seed):
    e = RandomExprs(seed).mixed()
    assert not diff_odd(diff_odd(e, TP), TM) + diff_odd(diff_odd(e, TM), TP)
    assert not diff_odd(diff_odd(e, TP), TP)
    assert diff(diff_odd(e, TP), XP) == diff_odd(diff(e, XP), TP)
    assert diff(diff(e, XP), XM) == diff(diff(e, XM), XP)
    assert not apply_D("+", apply_D("-", e)) + apply_D("-", apply_D("+", e))


def _env():
    env = standard_env(auto=True)
    for n in ("u", "v", "w"):
        env.declare_func(Func(n, EVEN, arity=2))
    for n in ("g", "h"):
        env.declare_func(Func(n, ODD, arity=2))
    for n in ("μ", "ν", "ρ"):
        env.declare_const(n, ODD)
    return env


ENV = _env()


@CASES
@given(seeds)
def test_parser_round_trip(seed):
    e = RandomExprs(seed).mixed()
    text = to_text(e)
    back = parse(text, ENV)
    assert back == e
    assert to_text(back) == text


@CASES
@given(seeds)
def test_supercommutativity_and_nilpotency(seed):
    r = RandomExprs(seed)
    a, b = r.homogeneous(), r.homogeneous()
    assert a * b == (-1) ** (a.parity * b.parity) * b * a
    o = r.homogeneous(ODD)
    assert not o * o


@settings(max_examples=200, deadline=None, derandomize=True)
@given(seeds)
def test_exp_homomorphism(seed):
    r = RandomExprs(seed)
    a = constant("a") * XP + TP * r.odd_component()
    b = constant("b") * XM + TM * r.odd_component()
    assert exp(a + b) == exp(a) * exp(b)
