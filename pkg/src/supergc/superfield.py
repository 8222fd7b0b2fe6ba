"""Superspace coordinates, theta expansions and the operators D and J."""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import I
from .expr import (EVEN, ODD, Expr, as_expr, atom_of, coordinate, diff, diff_odd,
                   substitute)

XP = coordinate("x+")
XM = coordinate("x-")
TP = coordinate("θ+", ODD)
TM = coordinate("θ-", ODD)

# classical chart
Z = coordinate("z")
ZB = coordinate("zb")


def _pair(sign):
    if sign in ("+", 1, +1):
        return TP, XP
    if sign in ("-", -1):
        return TM, XM
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True)
class Chart:
    """Independent coordinates plus named dependent combinations."""

    bosonic: tuple = (XP, XM)
    fermionic: tuple = (TP, TM)
    dependencies: tuple = ()  # (name, Expr) pairs, e.g. the symmetry variable

    def names(self):
        return [str(c) for c in self.bosonic + self.fermionic] + [n for n, _ in self.dependencies]

    def __post_init__(self):
        names = self.names()
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be unique")
        for t in self.fermionic:
            if atom_of(t).parity != ODD:
                raise ValueError(f"{t} is not odd")


STANDARD = Chart()


@dataclass(frozen=True)
class Superfield:
    """``expr = base + θ+ plus + θ- minus + θ+θ- top``."""

    expr: Expr
    base: Expr
    plus: Expr
    minus: Expr
    top: Expr

    def components(self):
        return (self.base, self.plus, self.minus, self.top)

    def recompose(self) -> Expr:
        return recompose(*self.components())


def _at_zero(e, th):
    return substitute(e, {th: Expr()})


def theta_expand(e) -> Superfield:
    e = as_expr(e)
    dp = diff_odd(e, TP)
    dm = diff_odd(e, TM)
    base = _at_zero(_at_zero(e, TP), TM)
    plus = _at_zero(dp, TM)
    minus = _at_zero(dm, TP)
    top = diff_odd(dp, TM)
    return Superfield(e, base, plus, minus, top)


def recompose(base, plus, minus, top) -> Expr:
    return as_expr(base) + TP * as_expr(plus) + TM * as_expr(minus) + TP * TM * as_expr(top)


def superfield(base, plus, minus, top) -> Expr:
    """Build the expression of a superfield from its four components."""
    return recompose(base, plus, minus, top)


def apply_D(sign, e) -> Expr:
    """D± = ∂θ± − iθ±∂x±."""
    th, x = _pair(sign)
    e = as_expr(e)
    return diff_odd(e, th) - I * (th * diff(e, x))


def apply_J(sign, e) -> Expr:
    """J± = ∂θ± + iθ±∂x±."""
    th, x = _pair(sign)
    e = as_expr(e)
    return diff_odd(e, th) + I * (th * diff(e, x))


def partial(sign, e) -> Expr:
    _, x = _pair(sign)
    return diff(e, x)


def _anti(op1, s1, op2, s2, e):
    return op1(s1, op2(s2, e)) + op2(s2, op1(s1, e))


def operator_relations(e) -> dict:
    """Residuals of the D/J anticommutation relations and squares on ``e``.

    Every value is zero exactly when the relation holds on ``e``.
    """
    e = as_expr(e)
    D, J = apply_D, apply_J
    two_i = 2 * I
    out = {
        "{D+,D+}+2i∂+": _anti(D, "+", D, "+", e) + two_i * partial("+", e),
        "{D-,D-}+2i∂-": _anti(D, "-", D, "-", e) + two_i * partial("-", e),
        "{D+,D-}": _anti(D, "+", D, "-", e),
        "{J+,J+}-2i∂+": _anti(J, "+", J, "+", e) - two_i * partial("+", e),
        "{J-,J-}-2i∂-": _anti(J, "-", J, "-", e) - two_i * partial("-", e),
        "{J+,J-}": _anti(J, "+", J, "-", e),
        "{J+,D+}": _anti(J, "+", D, "+", e),
        "{J+,D-}": _anti(J, "+", D, "-", e),
        "{J-,D+}": _anti(J, "-", D, "+", e),
        "{J-,D-}": _anti(J, "-", D, "-", e),
        "D+^2+i∂+": D("+", D("+", e)) + I * partial("+", e),
        "D-^2+i∂-": D("-", D("-", e)) + I * partial("-", e),
        "J+^2-i∂+": J("+", J("+", e)) - I * partial("+", e),
        "J-^2-i∂-": J("-", J("-", e)) - I * partial("-", e),
    }
    return out


def check_operator_relations(samples) -> dict:
    """Per-relation list of residuals over ``samples``; all must be 0."""
    report: dict = {}
    for e in samples:
        for name, r in operator_relations(e).items():
            report.setdefault(name, []).append(r)
    return report


def susy_shift(e, eta, sign="+", theta_factor=1) -> Expr:
    """Finite SUSY transformation x± → x± + iηθ±, θ± → θ± + c·η applied to ``e``.

    With the default ``c = 1`` the result equals ``e + η J± e`` exactly.
    """
    th, x = _pair(sign)
    eta = as_expr(eta)
    if eta.parity != ODD:
        raise ValueError("the SUSY parameter must be odd")
    return substitute(e, {x: x + I * (eta * th), th: th + theta_factor * eta})


__all__ = ["XP", "XM", "TP", "TM", "Z", "ZB", "Chart", "STANDARD", "Superfield",
           "theta_expand", "recompose", "superfield", "apply_D", "apply_J", "partial",
           "operator_relations", "check_operator_relations", "susy_shift", "EVEN", "ODD"]
