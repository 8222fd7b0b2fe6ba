"""Generic and random superfields used by the identity checks and tests."""

from __future__ import annotations

import random
from fractions import Fraction

from .coeff import GaussQ
from .expr import EVEN, ODD, Expr, Func, constant, exp
from .superfield import TM, TP, XM, XP, recompose


def generic_superfield(name: str, parity: int = EVEN) -> Expr:
    """Superfield with four opaque component functions of (x+, x-).

    ``name0`` and ``name3`` carry the superfield's parity, ``name1``/``name2``
    the opposite one.
    """
    other = 1 - parity
    comps = [Func(f"{name}{k}", p, arity=2)(XP, XM)
             for k, p in enumerate((parity, other, other, parity))]
    return recompose(*comps)


def bosonic_function(name: str, bodiless=False) -> Expr:
    """An even function of (x+, x-) only (no theta dependence)."""
    return Func(name, EVEN, arity=2, bodiless=bodiless)(XP, XM)


class RandomExprs:
    """Seeded generator of small random superspace expressions."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)
        self.even_f = [Func(n, EVEN, arity=2) for n in ("u", "v", "w")]
        self.odd_f = [Func(n, ODD, arity=2) for n in ("g", "h")]
        self.even_c = [constant(n) for n in ("a", "b")]
        self.odd_c = [constant(n, ODD) for n in ("μ", "ν", "ρ")]

    def coeff(self):
        r = self.rng
        re = Fraction(r.randint(-3, 3), r.randint(1, 3))
        im = Fraction(r.randint(-2, 2), r.randint(1, 2)) if r.random() < 0.3 else 0
        c = GaussQ(re, im)
        return c if c else GaussQ(1)

    def even_component(self, depth=0) -> Expr:
        r = self.rng
        out = Expr()
        for _ in range(r.randint(1, 2)):
            t = Expr.const(self.coeff())
            for _ in range(r.randint(0, 2)):
                pick = r.random()
                if pick < 0.5:
                    t = t * r.choice(self.even_f)(XP, XM)
                elif pick < 0.7:
                    t = t * r.choice(self.even_c)
                elif pick < 0.85 and depth == 0:
                    t = t * exp(r.choice(self.even_c) * (XP if r.random() < 0.5 else XM))
                else:
                    o1, o2 = r.sample(self.odd_c, 2)
                    t = t * o1 * o2
            out = out + t
        return out

    def odd_component(self) -> Expr:
        r = self.rng
        out = Expr()
        for _ in range(r.randint(1, 2)):
            if r.random() < 0.6:
                t = r.choice(self.odd_f)(XP, XM)
            else:
                t = r.choice(self.odd_c)
            out = out + self.even_component(depth=1) * t
        return out

    def superfield(self, parity=None) -> Expr:
        if parity is None:
            parity = self.rng.choice((EVEN, ODD))
        if parity == EVEN:
            return recompose(self.even_component(), self.odd_component(),
                             self.odd_component(), self.even_component())
        return recompose(self.odd_component(), self.even_component(),
                         self.even_component(), self.odd_component())

    def homogeneous(self, parity=None) -> Expr:
        return self.superfield(parity)

    def mixed(self) -> Expr:
        return self.superfield(EVEN) + self.superfield(ODD)


def theta_monomial(rng: random.Random) -> Expr:
    """Random product of theta coordinates in a random order."""
    out = Expr.const(1)
    for t in rng.sample([TP, TM], rng.randint(0, 2)):
        out = out * t
    return out
