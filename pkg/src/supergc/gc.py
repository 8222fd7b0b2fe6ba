"""Gauss-Codazzi systems, solution records and constraint-aware verification.

The residual templates live in ``data/systems.toml`` as expression text over
named fields; a solution record binds those names and may carry constraints,
oriented into rewrite rules before the residuals are reduced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .coeff import ONE
from .expr import (EVEN, FUNC, MIXED, ODD, Atom, Expr, NotInvertible, ParityError,
                   as_expr, atom_of, diff, dummy, exp, inverse, substitute, to_text)
from .kernels import merge_odd
from .parser import Env, parse, standard_env
from .superfield import apply_D

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

VARIANTS = ("classical", "bosonic", "fermionic", "fermionic-constf")

ALIASES = {"φ": "phi", "Q̄": "Qb", "Qbar": "Qb", "Γ11^1": "R+", "Γ22^2": "T-"}


class MissingBinding(KeyError):
    pass


class ConstraintError(ValueError):
    """A constraint that cannot be oriented into a terminating rewrite."""


@lru_cache(maxsize=None)
def _systems_data():
    text = resources.files("supergc").joinpath("data", "systems.toml").read_text("utf-8")
    return tomllib.loads(text)


@dataclass(frozen=True)
class GCSystem:
    variant: str
    even: tuple
    odd: tuple
    equations: tuple
    names: tuple

    @property
    def fields(self):
        return self.even + self.odd

    def parity_of(self, name):
        return EVEN if name in self.even else ODD

    def env(self, bindings, base: Env | None = None) -> Env:
        env = (base or standard_env()).copy()
        for name in self.fields:
            if name not in bindings:
                raise MissingBinding(f"{self.variant}: no binding for field {name}")
            val = as_expr(bindings[name])
            want = self.parity_of(name)
            if val and val.parity != want:
                raise ParityError(
                    f"{self.variant}: field {name} must be {'odd' if want else 'even'}, "
                    f"got {to_text(val)}")
            env.bind(name, val)
        return env

    def residuals(self, bindings, base: Env | None = None) -> list:
        env = self.env(normalize_bindings(bindings, self.variant), base)
        return [parse(t, env) for t in self.equations]


def system(variant: str) -> GCSystem:
    data = _systems_data()
    if variant not in data or variant == "df":
        raise KeyError(f"unknown system {variant!r}; choose from {', '.join(VARIANTS)}")
    d = data[variant]
    return GCSystem(variant, tuple(d["even"]), tuple(d["odd"]),
                    tuple(d["equations"]), tuple(d["names"]))


def normalize_bindings(bindings, variant=None) -> dict:
    out = {ALIASES.get(k, k): as_expr(v) for k, v in bindings.items()}
    if variant == "classical" and "U" not in out and "u" in out:
        out["U"] = exp(out["u"])
    return out


# constraints ---------------------------------------------------------------

def _split(e: Expr, atom: Atom):
    """Write ``e = atom*C + rest``; ``C`` is None when ``atom`` is absent.

    Raises when ``atom`` occurs with a power above one.
    """
    coef, rest = {}, {}
    for (b, o), c in e._t.items():
        hit = False
        for idx, (x, p) in enumerate(b):
            if x == atom:
                if p != 1:
                    raise ConstraintError(f"{to_text(Expr.from_atom(atom))} occurs nonlinearly")
                coef[(b[:idx] + b[idx + 1:], o)] = c
                hit = True
                break
        if not hit:
            for j, x in enumerate(o):
                if x == atom:
                    coef[(b, o[:j] + o[j + 1:])] = -c if j & 1 else c
                    hit = True
                    break
        if not hit:
            rest[(b, o)] = c
    return (Expr(coef) if coef else None), Expr(rest)


def _dominates(d, k):
    return len(d) == len(k) and all(a >= b for a, b in zip(d, k))


@dataclass(frozen=True)
class Rule:
    """Oriented rewrite ``lhs -> rhs``.

    A ``derivative`` rule has a lhs ``F(#1..#n; k)`` and also rewrites every
    higher derivative of ``F`` by differentiating ``rhs``.  A ``monomial`` rule
    rewrites any term containing the lhs monomial as a factor.
    """

    kind: str
    lhs: Expr
    rhs: Expr
    source: str = ""

    @property
    def head(self) -> Atom:
        ((b, o), _), = self.lhs._t.items()
        return b[0][0] if b else o[0]

    def to_json(self):
        return {"kind": self.kind, "lhs": to_text(self.lhs), "rhs": to_text(self.rhs)}

    # derivative rules
    def _expand(self, x: Atom) -> Expr:
        head = self.head
        extra = [a - b for a, b in zip(x.deriv, head.deriv)]
        r = self.rhs
        for j, n in enumerate(extra):
            for _ in range(n):
                r = diff(r, dummy(j + 1))
        return substitute(r, {atom_of(dummy(j + 1)): a for j, a in enumerate(x.args)})

    def _matches(self, x: Atom) -> bool:
        h = self.head
        return (x.kind == FUNC and x.name == h.name and x.parity == h.parity
                and _dominates(x.deriv, h.deriv))

    def apply(self, e: Expr) -> Expr:
        if self.kind == "derivative":
            hits = {x: self._expand(x) for x in e.atoms() if self._matches(x)}
            return substitute(e, hits) if hits else e
        return self._apply_monomial(e)

    def _apply_monomial(self, e: Expr) -> Expr:
        ((pb, po), pc), = self.lhs._t.items()
        out = Expr()
        changed = False
        for (b, o), c in e._t.items():
            rb = _divide_powers(b, pb)
            ro = _remove_odd(o, po) if rb is not None else None
            if ro is None:
                out = out + Expr({(b, o): c})
                continue
            s, merged = merge_odd(po, ro)
            # o = s * po ++ ro, so term = (c s / pc) * lhs * rest
            coeff = c * s * pc.inverse()
            out = out + self.rhs * Expr({(rb, ro): coeff})
            changed = True
        return out if changed else e


def _divide_powers(b, pb):
    have = dict(b)
    for x, p in pb:
        if have.get(x, 0) < p:
            return None
        have[x] -= p
    return tuple((x, p) for x, p in b if have[x])


def _remove_odd(o, po):
    if not set(po) <= set(o):
        return None
    return tuple(x for x in o if x not in po)


def orient(equation: Expr, target: Expr, source: str = "") -> Rule:
    """Solve ``equation = 0`` for ``target`` and return the rewrite rule.

    ``target`` is either one function-derivative atom over distinct formal
    arguments ``#1..#n`` or a monomial whose exact occurrence in the equation
    has a scalar coefficient.
    """
    equation, target = as_expr(equation), as_expr(target)
    if not target.is_monomial():
        raise ConstraintError(f"solve-for target must be a monomial: {to_text(target)}")
    if equation.parity is MIXED:
        raise ConstraintError("constraint has mixed parity")
    ((tb, to), tc) = next(iter(target._t.items()))
    single = len(tb) + len(to) == 1 and tc == ONE and (not tb or tb[0][1] == 1)
    if single:
        x = tb[0][0] if tb else to[0]
        args = [a for a in x.args]
        formal = [as_expr(dummy(i + 1)) for i in range(len(args))]
        if x.kind == FUNC and args == formal:
            coef, rest = _split(equation, x)
            if coef is None:
                raise ConstraintError(f"{to_text(target)} does not occur in the constraint")
            if coef.parity != EVEN:
                raise ConstraintError("coefficient of the solved atom is not even")
            try:
                rhs = -(rest * inverse(coef))
            except NotInvertible as err:
                raise ConstraintError(
                    f"coefficient {to_text(coef)} of {to_text(target)} is not invertible") from err
            rule = Rule("derivative", Expr.from_atom(x), rhs, source)
            if any(rule._matches(y) for y in rhs.atoms()):
                raise ConstraintError(
                    f"right side still contains {x.name} at the solved order or higher")
            return rule
    key = (tb, to)
    c = equation._t.get(key)
    if c is None:
        raise ConstraintError(f"{to_text(target)} does not occur in the constraint")
    lhs = Expr({key: ONE})
    rest = equation - Expr({key: c})
    rule = Rule("monomial", lhs, _scale_inv(rest, -c), source)
    if rule._apply_monomial(rule.rhs) is not rule.rhs:
        raise ConstraintError(f"right side of {to_text(lhs)} still contains it: not orientable")
    return rule


def _scale_inv(e, c):
    return e * c.inverse()


def reduce_modulo_constraints(e, rules, max_rounds=64) -> Expr:
    """Rewrite ``e`` with ``rules`` until nothing changes."""
    e = as_expr(e)
    for _ in range(max_rounds):
        before = e
        for r in rules:
            e = r.apply(e)
        if e == before:
            return e
    raise ConstraintError(f"constraint rewriting did not settle in {max_rounds} rounds")


# solution records ------------------------------------------------------------

@dataclass
class SolutionRecord:
    name: str
    variant: str
    bindings: dict
    rules: list = field(default_factory=list)
    epsilon: int | None = None
    env: Env | None = None
    notes: list = field(default_factory=list)

    def system(self) -> GCSystem:
        return system(self.variant)


def residuals(sol: SolutionRecord) -> list:
    return sol.system().residuals(sol.bindings, sol.env)


def verify_solution(sol: SolutionRecord) -> dict:
    sysm = sol.system()
    raw = sysm.residuals(sol.bindings, sol.env)
    red = [reduce_modulo_constraints(r, sol.rules) for r in raw]
    return {
        "case": sol.name,
        "system": sol.variant,
        "epsilon": sol.epsilon,
        "equations": list(sysm.names),
        "residuals": [to_text(r) for r in red],
        "pass": all(not r for r in red),
    }


def df_compatibility(sol: SolutionRecord) -> dict:
    """Residuals of D+f, D-f against the connection and of the bracket condition."""
    kind = "bosonic" if sol.variant == "bosonic" else "fermionic"
    tmpl = _systems_data()["df"][kind]
    sysm = system("fermionic" if sol.variant == "fermionic-constf" else sol.variant)
    b = normalize_bindings(sol.bindings)
    if sol.variant == "fermionic-constf":
        b.setdefault("R+", apply_D("+", b["phi"]))
        b.setdefault("T-", apply_D("-", b["phi"]))
    env = sysm.env(b, sol.env)
    out = {}
    for k in ("plus", "minus", "bracket"):
        out[k] = reduce_modulo_constraints(parse(tmpl[k], env), sol.rules)
    return out


# zero-curvature cross-check ----------------------------------------------------

def _gc_of(variant, b):
    return dict(zip(system(variant).names, system(variant).residuals(b)))


def fermionic_zcc_map(b) -> dict:
    """Expected zero-curvature residual entries (E = I) in terms of the GC list.

    Besides the printed component equations, the off-diagonal entries pick up
    multiples of the f-compatibility residuals r+, r-; those are the extra
    terms a quotient by matrices annihilating the frame must absorb.
    """
    from fractions import Fraction
    half = Fraction(1, 2)
    comp = _gc_of("fermionic-components", b)
    env = system("fermionic").env(b)
    rp = parse(_systems_data()["df"]["fermionic"]["plus"], env)
    rm = parse(_systems_data()["df"]["fermionic"]["minus"], env)
    ep, em = exp(b["phi"]), exp(-b["phi"])
    H, Qp, Qm = b["H"], b["Q+"], b["Q-"]
    z = Expr()
    return {
        (0, 0): comp["i"], (1, 1): comp["iii"],
        (0, 2): comp["ii"] - half * ep * H * rp - Qp * rm,
        (1, 2): comp["iv"] - Qm * rp + half * ep * H * rm,
        (2, 0): -2 * em * comp["v"], (2, 1): -2 * em * comp["vi"],
        (0, 1): z, (1, 0): z, (2, 2): z,
    }


def bosonic_zcc_map(b) -> dict:
    """Expected zero-curvature residual entries for E = ±diag(1, 1, -1)."""
    from fractions import Fraction
    half = Fraction(1, 2)
    g = _gc_of("bosonic", b)
    env = system("bosonic").env(b)
    rp = parse(_systems_data()["df"]["bosonic"]["plus"], env)
    rm = parse(_systems_data()["df"]["bosonic"]["minus"], env)
    ep, em = exp(b["phi"]), exp(-b["phi"])
    H, Qp, Qm, f = b["H"], b["Q+"], b["Q-"], b["f"]
    return {
        (0, 0): g["ii"], (0, 1): g["v"], (1, 0): g["vi"], (1, 1): g["i"] - g["ii"],
        (2, 0): -2 * em * g["iv"], (2, 1): 2 * em * g["iii"],
        (0, 2): f * g["iii"] + half * ep * H * rp + Qp * rm,
        (1, 2): f * g["iv"] + Qm * rp - half * ep * H * rm,
        (2, 2): Expr(),
    }


def generic_bindings(variant: str) -> dict:
    """Generic superfields for every field of ``variant`` (f kept bodiless)."""
    from .sampling import bosonic_function, generic_superfield
    sysm = system(variant)
    out = {}
    for n in sysm.fields:
        if n == "f":
            out[n] = bosonic_function("f", bodiless=True)
        else:
            out[n] = generic_superfield(n.replace("+", "p").replace("-", "m"),
                                        sysm.parity_of(n))
    return out


def zcc_cross_check(variant: str, bindings=None, E=None) -> dict:
    """Compare the zero-curvature residual with the component equations entrywise.

    Returns ``{"entries": {"ij": residual-difference text}, "pass": bool,
    "extra": [entries that involve the f-compatibility residuals]}``.
    """
    from .supermatrix import bosonic_A, fermionic_A, sign_matrix, zcc_residual
    b = normalize_bindings(bindings or generic_bindings(variant))
    if variant == "fermionic":
        Ap, Am = fermionic_A(b["R+"], b["T-"], b["Q+"], b["Q-"], b["H"], b["phi"], b["f"])
        Z = zcc_residual(Ap, Am, E)
        want = fermionic_zcc_map(b)
    elif variant == "bosonic":
        Ap, Am = bosonic_A((b["R+"], b["R-"]), (b["S+"], b["S-"]), (b["T+"], b["T-"]),
                           b["Q+"], b["Q-"], b["H"], b["phi"], b["f"])
        Z = zcc_residual(Ap, Am, E if E is not None else sign_matrix(-1))
        want = bosonic_zcc_map(b)
    else:
        raise ValueError("zero-curvature cross-check covers the bosonic and fermionic systems")
    diffs = {f"{i + 1}{j + 1}": to_text(Z[i, j] - want[i, j]) for i in range(3) for j in range(3)}
    extra = ["13", "23"]
    return {"entries": diffs, "pass": all(v == "0" for v in diffs.values()), "extra": extra}


def subblock_cross_check(bindings=None) -> dict:
    """Subblock equations against the zero-curvature residual with E = diag(1,1,-1)."""
    from .supermatrix import bosonic_A, sign_matrix, subblock_equations, zcc_residual
    b = normalize_bindings(bindings or generic_bindings("bosonic"))
    Ap, Am = bosonic_A((b["R+"], b["R-"]), (b["S+"], b["S-"]), (b["T+"], b["T-"]),
                       b["Q+"], b["Q-"], b["H"], b["phi"], b["f"])
    Z = zcc_residual(Ap, Am, sign_matrix(-1))
    first, second, third, fourth = subblock_equations(Ap, Am)
    got = {}
    for i in range(2):
        for j in range(2):
            got[(i, j)] = first[i, j]
        got[(i, 2)] = second[i, 0]
        got[(2, i)] = third[0, i]
    got[(2, 2)] = fourth
    diffs = {f"{i + 1}{j + 1}": to_text(Z[i, j] - got[i, j]) for (i, j) in sorted(got)}
    return {"entries": diffs, "pass": all(v == "0" for v in diffs.values())}


# classical limit --------------------------------------------------------------

_CLASSICAL_NAMES = {"D+": "dz", "D-": "dzb", "phi": "u", "Q+": "Q", "Q-": "Qb"}


def _top_terms(text):
    """Split template text into signed top-level terms."""
    terms, depth, cur, sign = [], 0, "", 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and text[i - 1:i] == " " and text[i + 1:i + 2] == " ":
            if cur.strip():
                terms.append((sign, cur.strip()))
            sign, cur = (1 if ch == "+" else -1), ""
            i += 1
            continue
        cur += ch
        i += 1
    if cur.strip():
        terms.append((sign, cur.strip()))
    return terms


def _shape(term):
    import re
    t = term
    for k, v in _CLASSICAL_NAMES.items():
        t = t.replace(k, v)
    t = t.replace("log(U)", "u").replace("/U", "*exp(-u)").replace("*U", "*exp(u)")
    factors = sorted(f for f in re.split(r"\*", t) if not re.fullmatch(r"[0-9/]+", f))
    return tuple(sorted(f for f in factors if f != "f"))


def classical_limit_report() -> list:
    """Term-by-term shape comparison of the constant-f system with the classical one.

    Each row lists, per equation pair, the matched terms with their two signs;
    sign disagreements are reported, not treated as failures.
    """
    rows = []
    susy = system("fermionic-constf").equations
    cl = system("classical").equations
    order = [(0, 0), (1, 1), (2, 2)]
    for si, ci in order:
        a = [(s, _shape(t), t) for s, t in _top_terms(susy[si])]
        b = [(s, _shape(t), t) for s, t in _top_terms(cl[ci])]
        row = {"susy": susy[si], "classical": cl[ci], "terms": []}
        for s1, sh, t1 in a:
            match = next(((s2, t2) for s2, sh2, t2 in b if _same_shape(sh, sh2)), None)
            row["terms"].append({
                "susy": t1, "classical": match[1] if match else None,
                "sign_differs": bool(match and match[0] != s1),
            })
        rows.append(row)
    return rows


def _same_shape(a, b):
    def core(s):
        out = []
        for f in s:
            f = f.replace("dzb(dz(u))", "dz(dzb(u))")
            f = f.replace("(", "").replace(")", "")
            out.append(f)
        return sorted(out)
    ca, cb = core(a), core(b)
    if ca == cb:
        return True
    # H^2 vs H*H and Q*Qb orderings
    norm = lambda xs: sorted(x.replace("H^2", "H*H") for x in xs)
    return norm(ca) == norm(cb) or {x for x in ca if "exp" in x} == {x for x in cb if "exp" in x} \
        and len(ca) == len(cb)


__all__ = ["VARIANTS", "GCSystem", "system", "MissingBinding", "ConstraintError", "Rule",
           "orient", "reduce_modulo_constraints", "SolutionRecord", "residuals",
           "verify_solution", "df_compatibility", "zcc_cross_check", "subblock_cross_check",
           "generic_bindings", "classical_limit_report", "normalize_bindings"]
