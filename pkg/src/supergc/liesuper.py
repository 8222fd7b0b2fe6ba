"""Supervector fields, graded brackets, structure tables and adjoint orbits.

Vector fields live on a chart of independent and dependent coordinates; the
coefficient of each coordinate is an :class:`Expr`.  Elements of the Grassmann
envelope of an algebra (basis fields times even or odd parameters) are handled
abstractly through the structure constants.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .coeff import GaussQ, I, as_coeff
from .expr import (EVEN, MIXED, ODD, Expr, Func, NotInvertible, ParityError, as_expr,
                   atom_of, coordinate, diff, diff_odd, exp, inverse, to_text)


class NonClosure(ValueError):
    """A bracket does not lie in the span of the basis."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class AdjointError(ValueError):
    """ad_X has no closed-form exponential under the supported patterns."""


# charts -----------------------------------------------------------------------

_INDEP = (("x+", EVEN), ("x-", EVEN), ("θ+", ODD), ("θ-", ODD))

_CHART_SPECS = {
    "classical": (("z", EVEN), ("zb", EVEN), ("H", EVEN), ("Q", EVEN), ("Qb", EVEN),
                  ("U", EVEN)),
    "bosonic": _INDEP + (("phi", EVEN), ("H", EVEN), ("Q+", EVEN), ("Q-", EVEN),
                         ("f", EVEN), ("R+", ODD), ("R-", ODD), ("S+", ODD), ("S-", ODD),
                         ("T+", ODD), ("T-", ODD)),
    "fermionic": _INDEP + (("phi", EVEN), ("f", EVEN), ("H", ODD), ("Q+", ODD),
                           ("Q-", ODD), ("R+", ODD), ("T-", ODD)),
    "fermionic-constf": _INDEP + (("phi", EVEN), ("f", EVEN), ("H", ODD), ("Q+", ODD),
                                  ("Q-", ODD)),
}

_ALIASES = {"φ": "phi", "Qbar": "Qb", "z̄": "zb"}


class Chart:
    """Ordered coordinates with parities."""

    def __init__(self, name, spec):
        self.name = name
        self.names = [n for n, _ in spec]
        self.parity = dict(spec)
        self.coords = {n: coordinate(n, p) for n, p in spec}

    def canonical(self, name):
        name = _ALIASES.get(name, name)
        if name not in self.parity:
            raise KeyError(f"{name!r} is not a coordinate of the {self.name} chart")
        return name

    def derivative(self, g, name):
        x = self.coords[name]
        return diff_odd(g, x) if self.parity[name] == ODD else diff(g, x)

    def __getitem__(self, name):
        return self.coords[self.canonical(name)]


@lru_cache(maxsize=None)
def chart(name) -> Chart:
    return Chart(name, _CHART_SPECS[name])


# vector fields -----------------------------------------------------------------

class SuperVectorField:
    """``sum_i c^i d_i`` with coefficients to the left of the derivations."""

    __slots__ = ("chart", "coeffs", "parity")

    def __init__(self, chart_: Chart, coeffs=None):
        self.chart = chart_
        cs = {}
        for n, c in (coeffs or {}).items():
            c = as_expr(c)
            if c:
                cs[chart_.canonical(n)] = c
        self.coeffs = cs
        self.parity = self._parity()

    def _parity(self):
        ps = set()
        for n, c in self.coeffs.items():
            p = c.parity
            if p is MIXED:
                raise ParityError(f"coefficient of d/d{n} has mixed parity: {to_text(c)}")
            ps.add(p ^ self.chart.parity[n])
        if len(ps) > 1:
            raise ParityError("vector field is not homogeneous")
        return ps.pop() if ps else EVEN

    def __call__(self, g) -> Expr:
        g = as_expr(g)
        out = Expr()
        for n, c in self.coeffs.items():
            d = self.chart.derivative(g, n)
            if d:
                out = out + c * d
        return out

    def coefficient(self, name) -> Expr:
        return self.coeffs.get(self.chart.canonical(name), Expr())

    def _same_chart(self, other):
        if other.chart is not self.chart:
            raise ValueError("vector fields live on different charts")

    def __add__(self, other):
        self._same_chart(other)
        cs = dict(self.coeffs)
        for n, c in other.coeffs.items():
            cs[n] = cs.get(n, Expr()) + c
        return SuperVectorField(self.chart, cs)

    def __neg__(self):
        return SuperVectorField(self.chart, {n: -c for n, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        """Left multiplication ``a * X``."""
        a = as_expr(a)
        return SuperVectorField(self.chart, {n: a * c for n, c in self.coeffs.items()})

    def __rmul__(self, a):
        return self.scale(a)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return (isinstance(other, SuperVectorField) and other.chart is self.chart
                and self.coeffs == other.coeffs)

    def to_json(self):
        return {n: to_text(c) for n, c in sorted(self.coeffs.items())}

    def __repr__(self):
        return " + ".join(f"({to_text(c)})d[{n}]" for n, c in self.coeffs.items()) or "0"


def super_bracket(X: SuperVectorField, Y: SuperVectorField) -> SuperVectorField:
    """[X,Y] = X∘Y − (−1)^{|X||Y|} Y∘X, computed on coefficients."""
    X._same_chart(Y)
    sign = -1 if X.parity & Y.parity else 1
    out = {}
    for n in X.chart.names:
        v = X(Y.coefficient(n)) - sign * Y(X.coefficient(n))
        if v:
            out[n] = v
    return SuperVectorField(X.chart, out)


def field(chart_name, **coeffs):
    ch = chart(chart_name)
    return SuperVectorField(ch, coeffs)


# bases ----------------------------------------------------------------------------

def _pm(ch, pairs):
    return SuperVectorField(ch, {n: c for n, c in pairs})


def _susy_common(ch):
    c = ch.coords
    xp, xm, tp, tm = c["x+"], c["x-"], c["θ+"], c["θ-"]
    return {
        "P+": _pm(ch, [("x+", 1)]),
        "P-": _pm(ch, [("x-", 1)]),
        "J+": _pm(ch, [("θ+", 1), ("x+", I * tp)]),
        "J-": _pm(ch, [("θ-", 1), ("x-", I * tm)]),
        "K0": _pm(ch, [("H", -c["H"]), ("Q+", c["Q+"]), ("Q-", c["Q-"]), ("phi", 2)]),
        "_scale+": [("x+", -2 * xp), ("θ+", -tp), ("Q+", 2 * c["Q+"]), ("phi", 1)],
        "_scale-": [("x-", -2 * xm), ("θ-", -tm), ("Q-", 2 * c["Q-"]), ("phi", 1)],
    }


def _bosonic_basis():
    ch = chart("bosonic")
    c = ch.coords
    b = _susy_common(ch)
    K1 = _pm(ch, b["_scale+"] + [("R+", c["R+"]), ("R-", 2 * c["R-"]), ("S-", c["S-"]),
                                ("T+", -c["T+"])])
    K2 = _pm(ch, b["_scale-"] + [("R-", -c["R-"]), ("S+", c["S+"]), ("T+", 2 * c["T+"]),
                                ("T-", c["T-"])])
    C0 = _pm(ch, [("H", c["H"]), ("Q+", c["Q+"]), ("Q-", c["Q-"]), ("f", -2 * c["f"])])
    return [("K1b", K1), ("P+", b["P+"]), ("J+", b["J+"]), ("K2b", K2), ("P-", b["P-"]),
            ("J-", b["J-"]), ("K0", b["K0"]), ("C0", C0)]


def _fermionic_basis():
    ch = chart("fermionic")
    c = ch.coords
    b = _susy_common(ch)
    K1 = _pm(ch, b["_scale+"] + [("R+", c["R+"])])
    K2 = _pm(ch, b["_scale-"] + [("T-", c["T-"])])
    C0 = _pm(ch, [("H", c["H"]), ("Q+", c["Q+"]), ("Q-", c["Q-"]), ("f", -2 * c["f"])])
    W = _pm(ch, [("H", 1)])
    return [("K1f", K1), ("P+", b["P+"]), ("J+", b["J+"]), ("K2f", K2), ("P-", b["P-"]),
            ("J-", b["J-"]), ("K0", b["K0"]), ("C0", C0), ("W", W)]


def _constf_basis():
    ch = chart("fermionic-constf")
    b = _susy_common(ch)
    W = _pm(ch, [("H", 1)])
    return [("K1hat", _pm(ch, b["_scale+"])), ("P+", b["P+"]), ("J+", b["J+"]),
            ("K2hat", _pm(ch, b["_scale-"])), ("P-", b["P-"]), ("J-", b["J-"]),
            ("K0", b["K0"]), ("W", W)]


def _classical_basis():
    ch = chart("classical")
    c = ch.coords
    z, zb, Q, Qb, U, H = c["z"], c["zb"], c["Q"], c["Qb"], c["U"], c["H"]
    return [
        ("e0", _pm(ch, [("H", -H), ("Q", Q), ("Qb", Qb), ("U", 2 * U)])),
        ("e1", _pm(ch, [("z", 1)])),
        ("e2", _pm(ch, [("zb", 1)])),
        ("e3", _pm(ch, [("z", z), ("Q", -2 * Q), ("U", -U)])),
        ("e4", _pm(ch, [("zb", zb), ("Qb", -2 * Qb), ("U", -U)])),
        ("e5", _pm(ch, [("z", z * z), ("Q", -4 * z * Q), ("U", -2 * z * U)])),
        ("e6", _pm(ch, [("zb", zb * zb), ("Qb", -4 * zb * Qb), ("U", -2 * zb * U)])),
    ]


def classical_X(eta: Func) -> SuperVectorField:
    """X(η) = η(z)∂_z + η′(z)(−2Q∂_Q − U∂_U)."""
    ch = chart("classical")
    z = ch.coords["z"]
    e, de = eta(z), eta(z, d=(1,))
    return _pm(ch, [("z", e), ("Q", -2 * de * ch.coords["Q"]), ("U", -de * ch.coords["U"])])


def classical_Y(zeta: Func) -> SuperVectorField:
    """Y(ζ) = ζ(z̄)∂_z̄ + ζ′(z̄)(−2Q̄∂_Q̄ − U∂_U)."""
    ch = chart("classical")
    zb = ch.coords["zb"]
    e, de = zeta(zb), zeta(zb, d=(1,))
    return _pm(ch, [("zb", e), ("Qb", -2 * de * ch.coords["Qb"]),
                    ("U", -de * ch.coords["U"])])


# algebras ---------------------------------------------------------------------------

def _solve(rows, rhs, n):
    """Exact Gaussian elimination; returns a solution vector or None."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for col in range(n):
        p = next((i for i in range(r, len(m)) if m[i][col]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][col].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(col)
        r += 1
    zero = as_coeff(0)
    for i in range(r, len(m)):
        if m[i][n]:
            return None
    sol = [zero] * n
    for i, col in enumerate(piv_cols):
        sol[col] = m[i][n]
    return sol


class SuperAlgebra:
    """A finite basis of homogeneous vector fields and its structure table."""

    def __init__(self, name, basis, title=""):
        self.name = name
        self.title = title
        self.names = [n for n, _ in basis]
        self.fields = dict(basis)
        self.parity = {n: f.parity for n, f in basis}
        self.index = {n: i for i, n in enumerate(self.names)}
        self._table = None

    def decompose(self, X: SuperVectorField) -> dict:
        """Constant coefficients of ``X`` in the basis, or :class:`NonClosure`."""
        eqs = {}
        for k, n in enumerate(self.names):
            for cname, c in self.fields[n].coeffs.items():
                for key, v in c._t.items():
                    eqs.setdefault((cname, key), {})[k] = v
        target = {}
        for cname, c in X.coeffs.items():
            for key, v in c._t.items():
                target[(cname, key)] = v
                eqs.setdefault((cname, key), {})
        keys = sorted(eqs, key=repr)
        zero = as_coeff(0)
        rows = [[eqs[k].get(j, zero) for j in range(len(self.names))] for k in keys]
        rhs = [target.get(k, zero) for k in keys]
        sol = _solve(rows, rhs, len(self.names))
        if sol is None:
            raise NonClosure(f"{X!r} is not in the span of {self.name}", X)
        return {self.names[j]: c for j, c in enumerate(sol) if c}

    def bracket(self, a, b) -> dict:
        return self.table()[(a, b)]

    def table(self) -> dict:
        if self._table is None:
            t = {}
            for a in self.names:
                for b in self.names:
                    t[(a, b)] = self.decompose(super_bracket(self.fields[a], self.fields[b]))
            self._table = t
        return self._table

    def rows(self):
        t = self.table()
        return [[format_combination(t[(a, b)], self.names) for b in self.names]
                for a in self.names]

    def to_json(self):
        return {"algebra": self.name, "basis": list(self.names),
                "parity": {n: "odd" if p else "even" for n, p in self.parity.items()},
                "rows": self.rows()}

    # checks ------------------------------------------------------------------
    def antisymmetry_residuals(self):
        """Cells where [A,B] + (−1)^{|A||B|}[B,A] is non-zero."""
        bad = []
        t = self.table()
        for a in self.names:
            for b in self.names:
                s = -1 if self.parity[a] & self.parity[b] else 1
                r = _lin_add(t[(a, b)], t[(b, a)], s)
                if r:
                    bad.append((a, b, r))
        return bad

    def jacobi_residuals(self):
        """Graded Jacobi: (−1)^{ac}[A,[B,C]] + cyclic = 0 on all basis triples."""
        bad = []
        p = self.parity
        for a in self.names:
            for b in self.names:
                for c in self.names:
                    tot = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        s = -1 if p[x] & p[z] else 1
                        inner = self.table()[(y, z)]
                        tot = _lin_add(tot, self.bracket_combination({x: 1}, inner), s)
                    if tot:
                        bad.append((a, b, c, tot))
        return bad

    def bracket_combination(self, u: dict, v: dict) -> dict:
        """Bracket of two numeric combinations (no Grassmann parameters)."""
        out = {}
        t = self.table()
        for a, ca in u.items():
            for b, cb in v.items():
                out = _lin_add(out, t[(a, b)], as_coeff(ca) * as_coeff(cb))
        return out

    def cross_residuals(self, blocks):
        """Brackets between distinct summands that fail to vanish."""
        bad = []
        for i, A in enumerate(blocks):
            for B in blocks[i + 1:]:
                for a in A:
                    for b in B:
                        r = self.table()[(a, b)]
                        if r:
                            bad.append((a, b, r))
        return bad

    def escape_residuals(self, block):
        """Brackets inside ``block`` that leave it."""
        bad = []
        for a in block:
            for b in block:
                r = {k: v for k, v in self.table()[(a, b)].items() if k not in block}
                if r:
                    bad.append((a, b, r))
        return bad

    def center(self):
        t = self.table()
        return [a for a in self.names if all(not t[(a, b)] for b in self.names)]

    def realize(self, element: dict) -> SuperVectorField:
        """Vector field ``sum a_k B_k`` of an envelope element."""
        out = None
        for n, a in element.items():
            v = self.fields[n].scale(a)
            out = v if out is None else out + v
        return out if out is not None else SuperVectorField(self.fields[self.names[0]].chart)


def _lin_add(u: dict, v: dict, s=1) -> dict:
    out = dict(u)
    s = as_coeff(s)
    for k, c in v.items():
        x = out.get(k, as_coeff(0)) + s * as_coeff(c)
        if x:
            out[k] = x
        else:
            out.pop(k, None)
    return out


_BUILDERS = {
    "classical-finite": (_classical_basis, "seven-dimensional classical algebra e0..e6"),
    "bosonic": (_bosonic_basis, "bosonic SUSY GC symmetry superalgebra"),
    "fermionic": (_fermionic_basis, "fermionic SUSY GC symmetry superalgebra"),
    "fermionic-constf": (_constf_basis, "fermionic superalgebra with constant f"),
}
ALGEBRAS = tuple(_BUILDERS)
_SHORT = {"g": "bosonic", "h": "fermionic", "hhat": "fermionic-constf",
          "L1": "classical-finite", "classical": "classical-finite"}


def algebra(name) -> SuperAlgebra:
    return _algebra(_SHORT.get(name, name))


@lru_cache(maxsize=None)
def _algebra(name) -> SuperAlgebra:
    try:
        build, title = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown algebra {name!r}; choose from {', '.join(ALGEBRAS)}") from None
    return SuperAlgebra(name, build(), title)


# summands of the direct / semidirect decompositions
DECOMPOSITIONS = {
    "classical-finite": [["e1", "e3", "e5"], ["e2", "e4", "e6"], ["e0"]],
    "bosonic": [["K1b", "P+", "J+"], ["K2b", "P-", "J-"], ["K0"], ["C0"]],
    "fermionic": [["K1f", "P+", "J+"], ["K2f", "P-", "J-"], ["K0", "C0", "W"]],
    "fermionic-constf": [["K1hat", "P+", "J+"], ["K2hat", "P-", "J-"], ["K0", "W"]],
}
IDEALS = {
    "classical-finite": [],
    "bosonic": [["P+", "J+"], ["P-", "J-"]],
    "fermionic": [["P+", "J+"], ["P-", "J-"], ["W"]],
    "fermionic-constf": [["P+", "J+"], ["P-", "J-"], ["W"]],
}


def decomposition_report(name) -> dict:
    alg = algebra(name)
    blocks = DECOMPOSITIONS[alg.name]
    cross = alg.cross_residuals(blocks)
    inside = [r for b in blocks for r in alg.escape_residuals(b)]
    ideal = []
    for b in IDEALS[alg.name]:
        for a in alg.names:
            for x in b:
                r = {k: v for k, v in alg.table()[(a, x)].items() if k not in b}
                if r:
                    ideal.append((a, x, r))
    return {"algebra": alg.name, "cross": [(a, b, format_combination(r, alg.names))
                                            for a, b, r in cross],
            "escape": [(a, b, format_combination(r, alg.names)) for a, b, r in inside],
            "ideal": [(a, b, format_combination(r, alg.names)) for a, b, r in ideal],
            "center": alg.center(),
            "pass": not cross and not inside and not ideal}


# cell text ---------------------------------------------------------------------

def _coeff_prefix(c: GaussQ) -> str:
    re_, im = Fraction(c.re), Fraction(c.im)
    if im == 0:
        if re_ == 1:
            return ""
        if re_ == -1:
            return "-"
        return str(re_)
    if re_ == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{im}i"
    return f"({c})"


def format_combination(comb: dict, order) -> str:
    if not comb:
        return "0"
    parts = []
    for n in order:
        if n in comb:
            p = _coeff_prefix(comb[n]) + n
            parts.append(p if p.startswith("-") or not parts else "+" + p)
    return "".join(parts)


_CELL = re.compile(r"([+-]?)((?:\d+(?:/\d+)?)?)(i?)([A-Za-z]\w*[+-]?)")


def parse_combination(text: str, names) -> dict:
    """Inverse of :func:`format_combination` for the cell syntax ``2iP+``, ``-W``."""
    text = text.replace(" ", "").replace("−", "-")
    if text in ("", "0"):
        return {}
    out = {}
    pos = 0
    while pos < len(text):
        m = _CELL.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot read table cell {text!r}")
        sign, num, imag, name = m.groups()
        if name not in names:
            raise ValueError(f"unknown basis element {name!r} in {text!r}")
        c = as_coeff(Fraction(num) if num else 1)
        if imag:
            c = c * I
        if sign == "-":
            c = -c
        out = _lin_add(out, {name: c})
        pos = m.end()
    return out


def load_golden(name) -> dict:
    from .scenario import data_dir
    path = data_dir() / "tables" / f"{_SHORT.get(name, name)}.json"
    return json.loads(path.read_text("utf-8"))


def table_diff(name) -> dict:
    """Cell-by-cell comparison of the computed table with the bundled transcription."""
    alg = algebra(name)
    gold = load_golden(alg.name)
    if gold["basis"] != alg.names:
        raise ValueError(f"golden basis {gold['basis']} differs from {alg.names}")
    diffs = []
    t = alg.table()
    cells = 0
    for i, a in enumerate(alg.names):
        for j, b in enumerate(alg.names):
            cells += 1
            want = parse_combination(gold["rows"][i][j], alg.names)
            if want != t[(a, b)]:
                diffs.append({"row": a, "col": b, "expected": gold["rows"][i][j],
                              "computed": format_combination(t[(a, b)], alg.names)})
    return {"algebra": alg.name, "cells": cells, "diffs": diffs, "pass": not diffs}


# classical infinite-dimensional brackets ------------------------------------------

def virasoro_check(eta1=None, eta2=None, zeta1=None, zeta2=None) -> dict:
    """Brackets of X(η), Y(ζ) and e0 with opaque η, ζ against the closed forms."""
    eta1, eta2 = eta1 or Func("η1"), eta2 or Func("η2")
    zeta1, zeta2 = zeta1 or Func("ζ1"), zeta2 or Func("ζ2")
    ch = chart("classical")
    c = ch.coords
    z, zb = c["z"], c["zb"]
    e0 = dict(_classical_basis())["e0"]

    def F(f, x, k=0):
        return f(x, d=(k,)) if k else f(x)

    X1, X2 = classical_X(eta1), classical_X(eta2)
    Y1, Y2 = classical_Y(zeta1), classical_Y(zeta2)
    a = F(eta1, z) * F(eta2, z, 1) - F(eta1, z, 1) * F(eta2, z)
    b = F(eta1, z, 2) * F(eta2, z) - F(eta1, z) * F(eta2, z, 2)
    want_xx = _pm(ch, [("z", a), ("Q", 2 * b * c["Q"]), ("U", b * c["U"])])
    a = F(zeta1, zb) * F(zeta2, zb, 1) - F(zeta1, zb, 1) * F(zeta2, zb)
    b = F(zeta1, zb, 2) * F(zeta2, zb) - F(zeta1, zb) * F(zeta2, zb, 2)
    want_yy = _pm(ch, [("zb", a), ("Qb", 2 * b * c["Qb"]), ("U", b * c["U"])])
    zero = SuperVectorField(ch)
    checks = {
        "[X(η1),X(η2)]": (super_bracket(X1, X2), want_xx),
        "[Y(ζ1),Y(ζ2)]": (super_bracket(Y1, Y2), want_yy),
        "[X(η),Y(ζ)]": (super_bracket(X1, Y1), zero),
        "[X(η),e0]": (super_bracket(X1, e0), zero),
        "[Y(ζ),e0]": (super_bracket(Y1, e0), zero),
    }
    out = {k: (got - want).to_json() for k, (got, want) in checks.items()}
    alg = algebra("classical-finite")
    finite = {"[e1,e3]": ("e1", "e3", {"e1": 1}), "[e1,e5]": ("e1", "e5", {"e3": 2}),
              "[e3,e5]": ("e3", "e5", {"e5": 1}), "[e2,e4]": ("e2", "e4", {"e2": 1}),
              "[e2,e6]": ("e2", "e6", {"e4": 2}), "[e4,e6]": ("e4", "e6", {"e6": 1})}
    fin = {k: format_combination(_lin_add(alg.bracket(a, b), w, -1), alg.names)
           for k, (a, b, w) in finite.items()}
    listed = {(a, b) for a, b, _ in finite.values()} | {(b, a) for a, b, _ in finite.values()}
    others = [f"[{a},{b}]" for a in alg.names for b in alg.names
              if (a, b) not in listed and alg.bracket(a, b)]
    e0_ok = all(not alg.bracket(n, "e0") for n in alg.names)
    ok = all(not v for v in out.values()) and all(v == "0" for v in fin.values()) \
        and not others and e0_ok
    return {"infinite": out, "finite": fin, "unexpected_nonzero": others,
            "e0_central": e0_ok, "pass": ok}


# envelope elements and the adjoint action -------------------------------------------

def _check_element(alg: SuperAlgebra, el: dict, what="element"):
    out = {}
    for n, a in el.items():
        if n not in alg.index:
            raise KeyError(f"{n!r} is not a basis element of {alg.name}")
        a = as_expr(a)
        if not a:
            continue
        p = a.parity
        if p is MIXED or p != alg.parity[n]:
            raise ParityError(f"{what}: coefficient {to_text(a)} of {n} must be "
                              f"{'odd' if alg.parity[n] else 'even'}")
        out[n] = a
    return out


def envelope_bracket(alg: SuperAlgebra, X: dict, Y: dict) -> dict:
    """[Σ x_k B_k, Σ y_j B_j] = Σ (−1)^{|k||j|} x_k y_j [B_k, B_j]."""
    out = {}
    t = alg.table()
    for k, xk in X.items():
        for j, yj in Y.items():
            s = -1 if alg.parity[k] & alg.parity[j] else 1
            for m, c in t[(k, j)].items():
                out[m] = out.get(m, Expr()) + s * (xk * yj) * c
    return {m: v for m, v in out.items() if v}


def _ad_matrix(alg, X):
    """M[m][j]: coefficient of B_m in ad_X applied to y_j B_j (acting on y_j from the left)."""
    M = {}
    t = alg.table()
    for k, xk in X.items():
        for j in alg.names:
            s = -1 if alg.parity[k] & alg.parity[j] else 1
            for m, c in t[(k, j)].items():
                M.setdefault(m, {})
                M[m][j] = M[m].get(j, Expr()) + s * xk * c
    return {m: {j: v for j, v in row.items() if v} for m, row in M.items()}


# exp-polynomials in t: {lam: {k: coeff}} meaning sum coeff * t^k * e^{lam t}

def _ep_add(a, b, s=1):
    out = {lam: dict(ks) for lam, ks in a.items()}
    for lam, ks in b.items():
        tgt = out.setdefault(lam, {})
        for k, c in ks.items():
            v = tgt.get(k, Expr()) + s * c
            if v:
                tgt[k] = v
            else:
                tgt.pop(k, None)
        if not tgt:
            out.pop(lam)
    return out


def _ep_lmul(c, a):
    out = {}
    for lam, ks in a.items():
        row = {k: c * v for k, v in ks.items() if c * v}
        if row:
            out[lam] = row
    return out


def _ep_integral(mu: Expr, k: int):
    """∫_0^t τ^k e^{μτ} dτ as an exp-polynomial."""
    if not mu:
        return {Expr(): {k + 1: as_expr(Fraction(1, k + 1))}}
    try:
        inv = inverse(mu)
    except NotInvertible as err:
        raise AdjointError(f"eigenvalue difference {to_text(mu)} is not invertible") from err
    # I_k = (t^k e^{μt} − k I_{k−1}) / μ, I_{-1} term replaced by the constant 1 at k = 0
    if k == 0:
        return {mu: {0: inv}, Expr(): {0: -inv}}
    prev = _ep_integral(mu, k - 1)
    out = _ep_add({mu: {k: inv}}, _ep_lmul(inv * k, prev), -1)
    return out


def _ep_shift(a, lam):
    return {l2 + lam: ks for l2, ks in a.items()} if lam else a


def _toposort(nodes, deps):
    order, state = [], {}

    def visit(n, stack):
        st = state.get(n)
        if st == 1:
            raise AdjointError("ad_X couples directions cyclically: " + " -> ".join(stack + [n]))
        if st == 2:
            return
        state[n] = 1
        for d in sorted(deps.get(n, ())):
            visit(d, stack + [n])
        state[n] = 2
        order.append(n)

    for n in nodes:
        visit(n, [])
    return order


@dataclass
class AdjointResult:
    algebra: str
    orientation: int
    result: dict

    def text(self, order=None):
        order = order or algebra(self.algebra).names
        parts = [f"({to_text(self.result[n])})*{n}" for n in order if n in self.result]
        return " + ".join(parts) or "0"

    def to_json(self):
        return {"algebra": self.algebra, "orientation": self.orientation,
                "result": {n: to_text(v) for n, v in sorted(self.result.items())}}


def adjoint_action(alg, X: dict, Y: dict, orientation: int = 1) -> AdjointResult:
    """Ad_{exp(sX)} Y = Σ_n s^n ad_X^n Y / n!, summed in closed form.

    The flow y' = ad_X y is solved exactly on the subspace generated by Y:
    diagonal entries of ad_X give exponentials, the rest is triangular and
    integrated term by term.  Cyclic couplings are rejected.
    """
    if isinstance(alg, str):
        alg = algebra(alg)
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    X = _check_element(alg, X, "X")
    Y = _check_element(alg, Y, "Y")
    M = _ad_matrix(alg, X)
    # directions reachable from the support of Y
    reach, todo = set(Y), list(Y)
    while todo:
        j = todo.pop()
        for m, row in M.items():
            if j in row and m not in reach:
                reach.add(m)
                todo.append(m)
    deps = {m: {j for j in M.get(m, {}) if j != m and j in reach} for m in reach}
    order = _toposort(sorted(reach, key=alg.index.get), deps)
    sol = {}
    for m in order:
        diag = M.get(m, {}).get(m, Expr())
        g = {}
        for j in deps[m]:
            g = _ep_add(g, _ep_lmul(M[m][j], sol.get(j, {})))
        # y_m = e^{dt} (y0 + ∫ e^{-dτ} g)
        acc = {Expr(): {0: Y[m]}} if m in Y else {}
        for lam, ks in g.items():
            for k, c in ks.items():
                acc = _ep_add(acc, _ep_lmul(c, _ep_integral(lam - diag, k)))
        sol[m] = _ep_shift(acc, diag)
    s = orientation
    out = {}
    for m, ep in sol.items():
        v = Expr()
        for lam, ks in ep.items():
            e = exp(s * lam) if lam else Expr.const(1)
            for k, c in ks.items():
                v = v + (s ** k) * c * e
        if v:
            out[m] = v
    return AdjointResult(alg.name, s, out)


def adjoint_series(alg, X: dict, Y: dict, orientation=1, order=8) -> dict:
    """Truncated Y + s[X,Y] + s²/2![X,[X,Y]] + …, used to cross-check closed forms."""
    if isinstance(alg, str):
        alg = algebra(alg)
    X = _check_element(alg, X, "X")
    term = _check_element(alg, Y, "Y")
    out = dict(term)
    fact = 1
    for n in range(1, order + 1):
        fact *= n
        term = envelope_bracket(alg, X, term)
        if not term:
            break
        for m, v in term.items():
            out[m] = out.get(m, Expr()) + Fraction(orientation ** n, fact) * v
    return {m: v for m, v in out.items() if v}


# linear-combination text -------------------------------------------------------------

def parse_element(text: str, alg, env=None) -> dict:
    """Parse ``alpha*K1b + ~eta*J+ + 2*P-`` into basis coefficients."""
    from .parser import parse, standard_env
    if isinstance(alg, str):
        alg = algebra(alg)
    env = env.copy() if env is not None else standard_env(auto=True)
    env.auto = True
    placeholders = {}
    names = sorted(alg.names, key=len, reverse=True)
    pat = re.compile(r"(?<![\w~#'])(" + "|".join(re.escape(n) for n in names) + r")(?![\w'])")

    def rep(m):
        n = m.group(1)
        ph = f"BASIS{alg.index[n]}"
        placeholders[ph] = n
        return ph

    body = pat.sub(rep, text)
    for ph in placeholders:
        env.declare_const(ph)
    e = parse(body, env)
    atoms = {atom_of(env.symbols[ph]): n for ph, n in placeholders.items()}
    out = {}
    for (b, o), c in e._t.items():
        hits = [(i, x) for i, (x, p) in enumerate(b) if x in atoms]
        if len(hits) != 1 or b[hits[0][0]][1] != 1:
            raise ValueError(f"{text!r} is not a linear combination of {alg.name} basis fields")
        i, x = hits[0]
        rest = Expr({(b[:i] + b[i + 1:], o): c})
        out[atoms[x]] = out.get(atoms[x], Expr()) + rest
    return _check_element(alg, {n: v for n, v in out.items() if v})


def format_element(el: dict, alg) -> str:
    if isinstance(alg, str):
        alg = algebra(alg)
    parts = []
    for n in alg.names:
        if n in el:
            c = el[n]
            if c == 1:
                parts.append(("+", n))
            elif c == -1:
                parts.append(("-", n))
            else:
                parts.append(("+", f"({to_text(c)})*{n}"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return out + "".join(f" {sg} {t}" for sg, t in parts[1:])





# classification data ------------------------------------------------------------

_LISTS = {"g": "g.jsonl", "h": "h.jsonl", "classical": "classical.jsonl", "L1": "classical.jsonl"}


@dataclass
class SubalgebraEntry:
    id: str
    algebra: str
    terms: list
    conditions: list
    note: str = ""

    def generator_text(self):
        parts = []
        for t in self.terms:
            p = t["parameter"]
            parts.append(t["basis"] if p == "1" else f"{p}*{t['basis']}")
        return " + ".join(parts)

    def element(self, env=None) -> dict:
        return parse_element(self.generator_text(), self.algebra, env)

    def to_json(self):
        out = {"id": self.id, "algebra": self.algebra, "terms": self.terms,
               "conditions": self.conditions}
        if self.note:
            out["note"] = self.note
        return out


def load_subalgebras(which) -> list:
    from .scenario import data_dir
    try:
        fn = _LISTS[which]
    except KeyError:
        raise KeyError(f"unknown list {which!r}; choose from g, h, classical") from None
    out = []
    path = data_dir() / "subalgebras" / fn
    for n, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            r = json.loads(line)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}:{n}: {err}") from err
        out.append(SubalgebraEntry(r["id"], r["algebra"], r["terms"], r.get("conditions", []),
                                   r.get("note", "")))
    return out


def validate_entry(entry: SubalgebraEntry) -> dict:
    """Parity consistency of every term and closure of the one-dimensional span."""
    alg = algebra(entry.algebra)
    problems = []
    for t in entry.terms:
        b = t["basis"]
        if b not in alg.index:
            problems.append(f"unknown basis element {b}")
            continue
        want = "odd" if alg.parity[b] else "even"
        if t.get("parity") != want:
            problems.append(f"{b} recorded as {t.get('parity')}, is {want}")
        podd = t["parameter"].startswith("~")
        if podd != bool(alg.parity[b]):
            problems.append(f"parameter {t['parameter']} of {b} has the wrong parity")
    closure = None
    if not problems:
        try:
            X = entry.element()
        except (ParityError, ValueError) as err:
            problems.append(str(err))
        else:
            abstract = envelope_bracket(alg, X, X)
            field_ = alg.realize(X)
            concrete = super_bracket(field_, field_)
            closure = not abstract and not concrete and field_.parity == EVEN
            if not closure:
                problems.append("[X,X] does not vanish")
    return {"id": entry.id, "generator": entry.generator_text(), "parity": not any(
        "parity" in p or "recorded" in p for p in problems), "closure": bool(closure),
        "problems": problems, "pass": not problems}


def load_conjugations() -> list:
    from .scenario import data_dir, tomllib
    raw = tomllib.loads((data_dir() / "subalgebras" / "conjugations.toml").read_text("utf-8"))
    return raw.get("check", [])


def conjugacy_spot_check(check: dict) -> dict:
    """Apply a declared normalizing transformation and compare with the representative."""
    from .expr import substitute
    from .parser import parse, standard_env
    alg = algebra(check["algebra"])
    env = standard_env(auto=True)
    X = parse_element(check["X"], alg, env)
    Y = parse_element(check["Y"], alg, env)
    s = int(check.get("orientation", 1))
    res = adjoint_action(alg, X, Y, s).result
    cases = []
    for case in check.get("cases", []):
        vals = {atom_of(parse(k, env)): parse(v, env) for k, v in case.get("values", {}).items()}
        got = {n: substitute(v, vals) for n, v in res.items()}
        got = {n: v for n, v in got.items() if v}
        lead = got.get(check["normalize"])
        want = parse_element(case["expect"], alg, env)
        if not lead:
            cases.append({"values": case.get("values", {}), "pass": False,
                          "residual": f"no {check['normalize']} component"})
            continue
        inv = inverse(lead)
        norm = {n: v * inv for n, v in got.items()}
        resid = {n: norm.get(n, Expr()) - want.get(n, Expr()) for n in set(norm) | set(want)}
        resid = {n: v for n, v in resid.items() if v}
        cases.append({"values": case.get("values", {}), "normalized": format_element(norm, alg),
                      "expected": format_element(want, alg),
                      "residual": format_element(resid, alg) if resid else "0",
                      "pass": not resid})
    return {"id": check["id"], "algebra": alg.name, "orientation": s,
            "orbit": format_element(res, alg), "cases": cases,
            "pass": bool(cases) and all(c["pass"] for c in cases)}


# the two worked orbits ---------------------------------------------------------------

WORKED_ORBITS = {
    "bosonic": {
        "algebra": "bosonic",
        "X": "alpha*K1b + beta*P+ + ~eta*J+ + delta*K2b + lambda*P- + ~rho*J-",
        "Y": "K2b + a*P+",
        "expect": "K2b + exp(-2*alpha)*a*P+ - (lambda/delta)*(exp(-2*delta) - 1)*P-"
                  " - (1/delta)*(exp(-delta) - 1)*~rho*J-",
    },
    "fermionic": {
        "algebra": "fermionic",
        "X": "alpha*K1f + beta*P+ + ~eta*J+ + gamma*K2f + delta*P- + ~lambda*J-"
             " + rho*K0 + sigma*C0 + ~tau*W",
        "Y": "K1f + ~zeta*W",
        "expect": "K1f + exp(rho - sigma)*~zeta*W - (beta/alpha)*(exp(2*alpha) - 1)*P+"
                  " - (1/alpha)*(exp(alpha) - 1)*~eta*J+",
    },
}


def orbit_report(key) -> dict:
    """Which orientation signs reproduce a worked orbit exactly."""
    from .parser import standard_env
    spec = WORKED_ORBITS[key]
    alg = algebra(spec["algebra"])
    env = standard_env(auto=True)
    X = parse_element(spec["X"], alg, env)
    Y = parse_element(spec["Y"], alg, env)
    want = parse_element(spec["expect"], alg, env)
    out = {"orbit": key, "algebra": alg.name, "expected": format_element(want, alg)}
    for s in (1, -1):
        got = adjoint_action(alg, X, Y, s).result
        out[f"s={s:+d}"] = {"result": format_element(got, alg), "match": got == want}
    out["orientations"] = [s for s in (1, -1) if out[f"s={s:+d}"]["match"]]
    out["pass"] = bool(out["orientations"])
    return out


__all__ = ["NonClosure", "AdjointError", "Chart", "chart", "SuperVectorField", "super_bracket",
           "field", "classical_X", "classical_Y", "SuperAlgebra", "ALGEBRAS", "algebra",
           "DECOMPOSITIONS", "decomposition_report", "format_combination",
           "parse_combination", "load_golden", "table_diff", "virasoro_check",
           "envelope_bracket", "AdjointResult", "adjoint_action", "adjoint_series",
           "parse_element", "format_element", "SubalgebraEntry", "load_subalgebras",
           "validate_entry", "load_conjugations", "conjugacy_spot_check", "WORKED_ORBITS",
           "orbit_report"]
