"""Canonical Grassmann-valued expressions.

An :class:`Expr` is a finite sum of monomials ``c * B * o1 o2 ... on`` where
``c`` is a Gaussian rational, ``B`` a commutative product of even atoms with
integer powers and ``o1 < o2 < ... < on`` distinct odd atoms in a fixed global
order.  Every constructor returns this canonical form, so structural equality
of two ``Expr`` objects is mathematical equality in the free supercommutative
algebra generated by the atoms.

Exponentials are kept as a single ``exp`` atom per monomial whose argument is
the *body* of the exponent (no odd or nilpotent atoms); the soul is always
expanded as a terminating series.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .coeff import ONE, ZERO, GaussQ, Q, as_coeff
from .kernels import merge_odd, merge_powers, sort_odd

EVEN = 0
ODD = 1
MIXED = None

COORD = "coord"
CONST = "const"
FUNC = "func"
EXP = "exp"
LOG = "log"

# kind-rank: odd coordinates lead, exp atoms trail (the product code relies on it)
_RANK = {
    (COORD, ODD): 0,
    (CONST, ODD): 1,
    (FUNC, ODD): 2,
    (COORD, EVEN): 10,
    (CONST, EVEN): 11,
    (FUNC, EVEN): 12,
    (LOG, EVEN): 13,
    (EXP, EVEN): 20,
}

_MINUS_ONE = GaussQ(-1, 0)


class ParityError(ValueError):
    pass


class CannotTerminate(ValueError):
    pass


class NotInvertible(ValueError):
    pass


class Atom:
    """An indivisible generator of the algebra."""

    __slots__ = ("kind", "name", "parity", "args", "deriv", "head",
                 "bodiless", "nilpotency", "key", "_hash")

    def __init__(self, kind, name, parity, args=(), deriv=(), head=None,
                 bodiless=False, nilpotency=None):
        self.kind = kind
        self.name = name
        self.parity = parity
        self.args = args
        self.deriv = deriv
        self.head = head
        self.bodiless = bodiless
        self.nilpotency = nilpotency
        self.key = (_RANK[(kind, parity)], name, tuple(a.key for a in args), deriv)
        self._hash = hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Atom) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    @property
    def is_odd(self):
        return self.parity == ODD

    @property
    def invertible(self):
        return self.parity == EVEN and not self.bodiless and self.nilpotency is None

    @property
    def nilpotent(self):
        return self.parity == ODD or self.bodiless or self.nilpotency is not None

    def __repr__(self):
        return f"Atom({atom_text(self)})"


class Expr:
    """Immutable canonical sum of monomials."""

    __slots__ = ("_t", "_key", "_hash")

    def __init__(self, terms=None):
        # terms: {(boson, odd): GaussQ}, already canonical and zero-free
        self._t = terms if terms is not None else {}
        self._key = None
        self._hash = None

    # construction -----------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        c = as_coeff(c)
        if not c:
            return Expr()
        return Expr({((), ()): c})

    @staticmethod
    def from_atom(atom: Atom, power: int = 1) -> "Expr":
        if atom.kind == EXP:
            c, b = _exp_parts(_scale(atom.args[0], power))
            return Expr({(b, ()): c}) if c else Expr()
        if atom.parity == ODD:
            if power != 1:
                if power < 1:
                    raise NotInvertible(f"odd atom {atom_text(atom)} is not invertible")
                return Expr()
            return Expr({((), (atom,)): ONE})
        if power == 0:
            return Expr.const(1)
        if power < 0 and not atom.invertible:
            raise NotInvertible(f"{atom_text(atom)} is nilpotent and has no inverse")
        if atom.nilpotency is not None and power >= atom.nilpotency:
            return Expr()
        return Expr({(((atom, power),), ()): ONE})

    # basic queries ----------------------------------------------------
    def items(self):
        return sorted(self._t.items(), key=lambda kv: _term_key(kv[0]))

    def __iter__(self):
        return iter(self.items())

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    @property
    def key(self):
        if self._key is None:
            self._key = tuple(sorted((_term_key(k), c.key()) for k, c in self._t.items()))
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = as_expr(other)
            except TypeError:
                return NotImplemented
        return self._t == other._t

    @property
    def parity(self):
        """EVEN, ODD, or MIXED (None).  Zero counts as EVEN."""
        ps = {len(o) & 1 for (_, o) in self._t}
        if not ps:
            return EVEN
        if len(ps) == 1:
            return ps.pop()
        return MIXED

    def is_homogeneous(self) -> bool:
        return self.parity is not MIXED

    def constant(self) -> GaussQ:
        return self._t.get(((), ()), ZERO)

    def atoms(self) -> set:
        out = set()
        for (b, o) in self._t:
            for x, _ in b:
                _collect_atoms(x, out)
            for x in o:
                _collect_atoms(x, out)
        return out

    def is_monomial(self) -> bool:
        return len(self._t) == 1

    def has_soul(self) -> bool:
        return any(_term_is_soul(k) for k in self._t)

    def body(self) -> "Expr":
        return Expr({k: c for k, c in self._t.items() if not _term_is_soul(k)})

    def soul(self) -> "Expr":
        return Expr({k: c for k, c in self._t.items() if _term_is_soul(k)})

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        if not other._t:
            return self
        if not self._t:
            return other
        t = dict(self._t)
        for k, c in other._t.items():
            v = t.get(k)
            if v is None:
                t[k] = c
            else:
                v = v + c
                if v:
                    t[k] = v
                else:
                    del t[k]
        return Expr(t)

    __radd__ = __add__

    def __neg__(self):
        return Expr({k: -c for k, c in self._t.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Expr):
            return _mul(self, other)
        if isinstance(other, (int, Fraction, GaussQ)) or type(other) is Q:
            return _scale(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussQ)) or type(other) is Q:
            return _scale(self, other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Expr):
            return _mul(self, inverse(other))
        return _scale(self, as_coeff(other).inverse())

    def __rtruediv__(self, other):
        return as_expr(other) * inverse(self)

    def __pow__(self, n: int):
        return power(self, n)

    def __repr__(self):
        return f"Expr({to_text(self)})"

    def __str__(self):
        return to_text(self)


def _collect_atoms(x: Atom, out: set):
    out.add(x)
    for a in x.args:
        out.update(a.atoms())


def _term_key(k):
    b, o = k
    return (len(o), tuple(x.key for x in o), tuple((x.key, p) for x, p in b))


def _term_is_soul(k) -> bool:
    b, o = k
    if o:
        return True
    for x, _ in b:
        if x.bodiless or x.nilpotency is not None:
            return True
    return False


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return Expr.from_atom(x)
    if isinstance(x, (int, Fraction, GaussQ)) or type(x) is Q:
        return Expr.const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


ZERO_EXPR = Expr()


def _scale(e: Expr, c) -> Expr:
    c = as_coeff(c)
    if not c:
        return Expr()
    if c == ONE:
        return e
    return Expr({k: v * c for k, v in e._t.items()})


# monomial products ------------------------------------------------------

_EXP_MERGE: dict = {}


def _mono_mul(k1, k2):
    """Product of two monomial keys -> (coefficient, key) or None."""
    b1, o1 = k1
    b2, o2 = k2
    s, o = merge_odd(o1, o2)
    if not s:
        return None
    c = ONE if s > 0 else _MINUS_ONE
    if not b2:
        b = b1
    elif not b1:
        b = b2
    else:
        b = merge_powers(b1, b2)
        n = len(b)
        if n and b[-1][0].kind == EXP and (b[-1][1] != 1 or (n > 1 and b[-2][0].kind == EXP)):
            cc, b = _fold_exps(b)
            if not cc:
                return None
            c = c * cc
        for x, p in b:
            if x.nilpotency is not None and p >= x.nilpotency:
                return None
    return c, (b, o)


def _fold_exps(b):
    """Combine all exp factors of a bosonic part into at most one."""
    rest = []
    exps = []
    for x, p in b:
        if x.kind == EXP:
            exps.append((x, p))
        else:
            rest.append((x, p))
    memo_key = tuple((x.key, p) for x, p in exps)
    hit = _EXP_MERGE.get(memo_key)
    if hit is None:
        arg = Expr()
        for x, p in exps:
            arg = arg + _scale(x.args[0], p)
        hit = _exp_parts(arg)
        _EXP_MERGE[memo_key] = hit
    c, eb = hit
    out = merge_powers(tuple(rest), eb)
    for x, p in out:
        if x.nilpotency is not None and p >= x.nilpotency:
            return ZERO, ()
    return c, out


def _mul(a: Expr, b: Expr) -> Expr:
    if not a._t or not b._t:
        return Expr()
    t: dict = {}
    for k1, c1 in a._t.items():
        for k2, c2 in b._t.items():
            r = _mono_mul(k1, k2)
            if r is None:
                continue
            c, k = r
            c = c * c1 * c2
            v = t.get(k)
            if v is None:
                t[k] = c
            else:
                v = v + c
                if v:
                    t[k] = v
                else:
                    del t[k]
    return Expr(t)


def mul(*factors) -> Expr:
    out = Expr.const(1)
    for f in factors:
        out = _mul(out, as_expr(f))
    return out


def add(*terms) -> Expr:
    out = Expr()
    for t in terms:
        out = out + as_expr(t)
    return out


# exponentials and logarithms ------------------------------------------

def _exp_parts(arg: Expr):
    """exp of a soul-free even ``arg`` as ``(coefficient, bosonic part)``.

    A rational multiple ``c`` of a ``log`` atom contributes ``floor(c)`` as a
    power and keeps the fraction in [0, 1) inside the exp, so that
    ``v*exp(-1/2*log(v))`` and ``exp(1/2*log(v))`` share one form.
    """
    coeff = ONE
    pulled = ()
    rest = {}
    for k, c in arg._t.items():
        b, o = k
        if (not o and len(b) == 1 and b[0][1] == 1 and b[0][0].kind == LOG
                and c.is_real()):
            n = int(c.re.numerator // c.re.denominator)
            frac = c - n
            if frac:
                rest[k] = frac
            if not n:
                continue
            inner = b[0][0].args[0]
            if inner.is_monomial() and inner.constant():
                coeff = coeff * inner.constant() ** n
            else:
                ((ib, _io), ic), = inner._t.items()
                coeff = coeff * ic ** n
                pulled = merge_powers(pulled, tuple((x, p * n) for x, p in ib))
            continue
        rest[k] = c
    if rest:
        atom = Atom(EXP, "exp", EVEN, args=(Expr(rest),))
        pulled = merge_powers(pulled, ((atom, 1),))
    return coeff, pulled


def _split_body_soul(e: Expr, what: str):
    body = {}
    soul = {}
    for k, c in e._t.items():
        b, o = k
        if o or any(x.nilpotency is not None for x, _ in b):
            soul[k] = c
        elif any(x.bodiless for x, _ in b):
            raise CannotTerminate(
                f"{what}: term {to_text(Expr({k: c}))} is bodiless with no declared "
                "nilpotency degree; the series cannot be shown to terminate")
        else:
            body[k] = c
    return Expr(body), Expr(soul)


def _nilpotent_series(s: Expr, coeffs) -> Expr:
    """Sum_k coeffs(k) s^k for nilpotent ``s`` (k >= 0)."""
    out = Expr.const(coeffs(0))
    if not s._t:
        return out
    term = Expr.const(1)
    bound = len({x for (_, o) in s._t for x in o}) + sum(
        x.nilpotency for (b, _) in s._t for x, _ in b if x.nilpotency is not None) + 2
    k = 0
    while True:
        k += 1
        term = _mul(term, s)
        if not term._t:
            return out
        if k > bound:  # pragma: no cover - guarded by nilpotency
            raise CannotTerminate("nilpotent series failed to terminate")
        out = out + _scale(term, coeffs(k))


def _nilpotent_series_terms(s: Expr, term_k) -> Expr:
    """Sum_k s^k * term_k(k) for nilpotent ``s`` (``term_k`` gives an Expr)."""
    out = term_k(0)
    power_k = Expr.const(1)
    k = 0
    while True:
        k += 1
        power_k = _mul(power_k, s)
        if not power_k._t:
            return out
        out = out + _mul(power_k, term_k(k))


def _inv_factorial(k):
    f = 1
    for j in range(2, k + 1):
        f *= j
    return GaussQ(Fraction(1, f))


def exp(e) -> Expr:
    """exp of an even expression; the nilpotent soul is expanded exactly."""
    e = as_expr(e)
    if e.parity != EVEN:
        raise ParityError(f"exp of a non-even argument: {to_text(e)}")
    body, soul = _split_body_soul(e, "exp")
    c, b = _exp_parts(body)
    head = Expr({(b, ()): c})
    if not soul._t:
        return head
    return _mul(head, _nilpotent_series(soul, _inv_factorial))


exp_series = exp


def _log_monomial(k, c: GaussQ) -> Expr:
    b, o = k
    if o:
        raise NotInvertible("log of an odd monomial")
    out = Expr()
    if c != ONE:
        out = out + Expr.from_atom(Atom(LOG, "log", EVEN, args=(Expr.const(c),)))
    for x, p in b:
        if x.kind == EXP:
            out = out + _scale(x.args[0], p)
        else:
            if not x.invertible:
                raise NotInvertible(f"log of nilpotent atom {atom_text(x)}")
            out = out + _scale(Expr.from_atom(
                Atom(LOG, "log", EVEN, args=(Expr.from_atom(x),))), p)
    return out


def log(e) -> Expr:
    """log of an even expression whose body is a single invertible monomial."""
    e = as_expr(e)
    if e.parity != EVEN:
        raise ParityError(f"log of a non-even argument: {to_text(e)}")
    body, soul = _split_body_soul(e, "log")
    if len(body) != 1:
        raise NotInvertible(f"log needs a one-term body, got {to_text(body)}")
    (k, c), = body._t.items()
    out = _log_monomial(k, c)
    if soul._t:
        r = _mul(soul, inverse(body))
        out = out + _nilpotent_series(
            r, lambda n: GaussQ(Fraction((-1) ** (n + 1), n)) if n else ZERO)
    return out


def _inverse_monomial(k, c: GaussQ) -> Expr:
    b, o = k
    if o:
        raise NotInvertible("odd monomials have no inverse")
    nb = []
    coeff = c.inverse()
    exp_arg = None
    for x, p in b:
        if x.kind == EXP:
            exp_arg = _scale(x.args[0], -p)
            continue
        if not x.invertible:
            raise NotInvertible(f"{atom_text(x)} is nilpotent and has no inverse")
        nb.append((x, -p))
    out = Expr({(tuple(nb), ()): coeff})
    if exp_arg is not None:
        ec, eb = _exp_parts(exp_arg)
        out = _mul(out, Expr({(eb, ()): ec}))
    return out


def inverse(e) -> Expr:
    """Multiplicative inverse of (invertible monomial body) + (nilpotent soul)."""
    e = as_expr(e)
    if e.parity != EVEN:
        raise NotInvertible(f"only even expressions can be inverted: {to_text(e)}")
    body, soul = _split_body_soul(e, "inverse")
    if len(body) != 1:
        raise NotInvertible(f"inverse needs a one-term body, got {to_text(body) or '0'}")
    (k, c), = body._t.items()
    binv = _inverse_monomial(k, c)
    if not soul._t:
        return binv
    r = _mul(soul, binv)
    return _mul(binv, _nilpotent_series(r, lambda n: GaussQ((-1) ** n)))


def power(e, n: int) -> Expr:
    e = as_expr(e)
    if not isinstance(n, int):
        raise TypeError("only integer powers are supported; use exp(p*log(x))")
    if n < 0:
        return power(inverse(e), -n)
    out = Expr.const(1)
    base = e
    while n:
        if n & 1:
            out = _mul(out, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return out


# atoms and function symbols ---------------------------------------------

def coordinate(name: str, parity: int = EVEN) -> Expr:
    return Expr.from_atom(Atom(COORD, name, parity))


def constant(name: str, parity: int = EVEN, bodiless: bool = False,
             nilpotency: int | None = None) -> Expr:
    if parity == ODD and nilpotency is not None:
        raise ValueError("odd atoms are nilpotent of degree 2 already")
    return Expr.from_atom(Atom(CONST, name, parity, bodiless=bodiless, nilpotency=nilpotency))


def atom_of(e) -> Atom:
    """The single atom of an expression that is exactly one atom."""
    if isinstance(e, Atom):
        return e
    e = as_expr(e)
    if len(e._t) == 1:
        (k, c), = e._t.items()
        b, o = k
        if c == ONE:
            if o and not b and len(o) == 1:
                return o[0]
            if not o and len(b) == 1 and b[0][1] == 1:
                return b[0][0]
    raise ValueError(f"{to_text(e)} is not a single atom")


_DUMMIES: dict = {}


def dummy(i: int) -> Expr:
    """Formal argument ``#i`` (1-based) used in closed-form derivative templates."""
    d = _DUMMIES.get(i)
    if d is None:
        d = _DUMMIES[i] = coordinate(f"#{i}")
    return d


class Func:
    """An opaque function symbol; calling it builds a function-application atom.

    ``closed`` maps an argument index (0-based) to a template expression in the
    formal arguments ``dummy(1..arity)`` giving the derivative of the function
    with respect to that argument.
    """

    def __init__(self, name: str, parity: int = EVEN, arity: int = 1,
                 bodiless: bool = False, nilpotency: int | None = None,
                 closed: Mapping[int, Expr] | None = None):
        self.name = name
        self.parity = parity
        self.arity = arity
        self.bodiless = bodiless
        self.nilpotency = nilpotency
        self.closed = dict(closed or {})

    def __eq__(self, other):
        return isinstance(other, Func) and (self.name, self.parity, self.arity) == \
            (other.name, other.parity, other.arity)

    def __hash__(self):
        return hash((self.name, self.parity, self.arity))

    def __repr__(self):
        return f"Func({self.name!r}, parity={self.parity}, arity={self.arity})"

    def _taylor(self, args, d, i) -> Expr:
        # F(.., b + s, ..) = sum_k s^k/k! d_i^k F(.., b, ..) with s nilpotent
        a = args[i]
        soul = Expr({k: c for k, c in a._t.items() if k[1]})
        body = a - soul
        base = list(args)
        base[i] = body
        dd = list(d)
        return _nilpotent_series_terms(
            soul, lambda k: _scale(self(*base, d=dd[:i] + [dd[i] + k] + dd[i + 1:]),
                                   _inv_factorial(k)))

    def __call__(self, *args, d=None) -> Expr:
        if len(args) != self.arity:
            raise TypeError(f"{self.name} takes {self.arity} argument(s), got {len(args)}")
        args = tuple(as_expr(a) for a in args)
        d = tuple(int(n) for n in d) if d else (0,) * self.arity
        if len(d) != self.arity or any(n < 0 for n in d):
            raise ValueError(f"bad derivative index {d} for {self.name}")
        for i, a in enumerate(args):
            if a.parity != EVEN:
                raise ParityError(f"argument {to_text(a)} of {self.name} is not even")
            if any(o for (_, o) in a._t):
                return self._taylor(args, d, i)
        for i, n in enumerate(d):
            if n and i in self.closed:
                rest = list(d)
                rest[i] -= 1
                tmpl = self.closed[i]
                for j, m in enumerate(rest):
                    for _ in range(m):
                        tmpl = diff(tmpl, dummy(j + 1))
                return substitute(tmpl, {atom_of(dummy(j + 1)): a for j, a in enumerate(args)})
        nil = self.nilpotency if not any(d) else None
        atom = Atom(FUNC, self.name, self.parity, args=args, deriv=d, head=self,
                    bodiless=self.bodiless, nilpotency=nil)
        return Expr.from_atom(atom)


# differentiation ----------------------------------------------------------

_DATOM: dict = {}


def _datom(x: Atom, v: Atom) -> Expr:
    """Derivative of an atom with respect to an even coordinate atom ``v``."""
    key = (x, v)
    hit = _DATOM.get(key)
    if hit is not None:
        return hit
    if x.kind == COORD:
        out = Expr.const(1) if x == v else Expr()
    elif x.kind == CONST:
        out = Expr()
    elif x.kind == FUNC:
        out = Expr()
        for i, a in enumerate(x.args):
            da = diff(a, v)
            if da._t:
                d = list(x.deriv)
                d[i] += 1
                out = out + _mul(da, x.head(*x.args, d=d))
    elif x.kind == EXP:
        out = _mul(diff(x.args[0], v), Expr.from_atom(x))
    elif x.kind == LOG:
        inner = x.args[0]
        out = _mul(diff(inner, v), inverse(inner))
    else:  # pragma: no cover
        raise TypeError(x.kind)
    _DATOM[key] = out
    return out


def _prod_keys(parts) -> Expr:
    out = Expr.const(1)
    for p in parts:
        out = _mul(out, p)
    return out


def diff(e, v) -> Expr:
    """Partial derivative with respect to an even coordinate (no signs)."""
    e = as_expr(e)
    v = atom_of(v)
    if v.parity != EVEN or v.kind != COORD:
        raise ValueError(f"{atom_text(v)} is not an even coordinate")
    out: dict = {}
    acc = Expr(out)
    for (b, o), c in e._t.items():
        for idx, (x, p) in enumerate(b):
            dx = _datom(x, v)
            if not dx._t:
                continue
            if x.kind == EXP:
                # d exp(A)^p = p A' exp(A)^p; exp atoms always carry power 1
                piece = _mul(Expr({(b, o): c}), diff(x.args[0], v))
                acc = acc + _scale(piece, p)
                continue
            rest = b[:idx] + ((x, p - 1),) + b[idx + 1:] if p != 1 else b[:idx] + b[idx + 1:]
            rest = tuple((y, q) for y, q in rest if q)
            piece = _mul(Expr({(rest, o): c}), dx)
            acc = acc + _scale(piece, p)
        for j, x in enumerate(o):
            dx = _datom(x, v)
            if not dx._t:
                continue
            pre = Expr({(b, o[:j]): c})
            post = Expr({((), o[j + 1:]): ONE})
            acc = acc + _prod_keys((pre, dx, post))
    return acc


def diff_odd(e, theta) -> Expr:
    """Left derivative with respect to an odd coordinate (graded Leibniz)."""
    e = as_expr(e)
    th = atom_of(theta)
    if th.parity != ODD or th.kind != COORD:
        raise ValueError(f"{atom_text(th)} is not an odd coordinate")
    t: dict = {}
    for (b, o), c in e._t.items():
        for j, x in enumerate(o):
            if x == th:
                k = (b, o[:j] + o[j + 1:])
                cc = c if not (j & 1) else -c
                v = t.get(k)
                if v is None:
                    t[k] = cc
                else:
                    v = v + cc
                    if v:
                        t[k] = v
                    else:
                        del t[k]
                break
    return Expr(t)


# substitution -------------------------------------------------------------

def _check_binding(atom: Atom, val: Expr):
    if not val._t:
        return
    p = val.parity
    if p is MIXED:
        raise ParityError(f"binding for {atom_text(atom)} has mixed parity: {to_text(val)}")
    if p != atom.parity:
        raise ParityError(
            f"binding for {'odd' if atom.parity else 'even'} atom {atom_text(atom)} "
            f"is {'odd' if p else 'even'}: {to_text(val)}")


def substitute(e, bindings: Mapping) -> Expr:
    """Simultaneous replacement of atoms, followed by normalization."""
    e = as_expr(e)
    bmap = {}
    for k, v in bindings.items():
        a = atom_of(k)
        v = as_expr(v)
        _check_binding(a, v)
        bmap[a] = v
    if not bmap:
        return e
    cache: dict = {}
    return _subst(e, bmap, cache)


def _subst_atom(x: Atom, bmap, cache) -> Expr:
    hit = cache.get(x)
    if hit is not None:
        return hit
    if x in bmap:
        out = bmap[x]
    elif x.kind == FUNC:
        nargs = tuple(_subst(a, bmap, cache) for a in x.args)
        if all(n is a for n, a in zip(nargs, x.args)):
            out = Expr.from_atom(x)
        else:
            out = x.head(*nargs, d=x.deriv)
    elif x.kind == EXP:
        na = _subst(x.args[0], bmap, cache)
        out = Expr.from_atom(x) if na is x.args[0] else exp(na)
    elif x.kind == LOG:
        na = _subst(x.args[0], bmap, cache)
        out = Expr.from_atom(x) if na is x.args[0] else log(na)
    else:
        out = Expr.from_atom(x)
    cache[x] = out
    return out


def _subst(e: Expr, bmap, cache) -> Expr:
    changed = False
    parts = []
    for k, c in e._t.items():
        b, o = k
        factors = []
        touched = False
        for x, p in b:
            s = _subst_atom(x, bmap, cache)
            factors.append((s, p))
            if not (len(s._t) == 1 and ((((x, 1),), ()) in s._t) and s._t[(((x, 1),), ())] == ONE):
                touched = True
        ofs = []
        for x in o:
            s = _subst_atom(x, bmap, cache)
            ofs.append(s)
            if not (len(s._t) == 1 and (((), (x,)) in s._t) and s._t[((), (x,))] == ONE):
                touched = True
        if not touched:
            parts.append(Expr({k: c}))
            continue
        changed = True
        term = Expr.const(c)
        for s, p in factors:
            term = _mul(term, power(s, p))
        for s in ofs:
            term = _mul(term, s)
        parts.append(term)
    if not changed:
        return e
    out = Expr()
    for p in parts:
        out = out + p
    return out


# raw-tree normalization ----------------------------------------------------

def normalize(tree) -> Expr:
    """Canonical form of a raw tree.

    Nodes are ``("+", *children)``, ``("*", *children)``, ``("exp", child)``,
    atoms, :class:`Expr` values and exact scalars.  Product children are
    multiplied left to right, so odd factors keep their written order.
    """
    if isinstance(tree, tuple) and tree and isinstance(tree[0], str):
        op = tree[0]
        kids = [normalize(t) for t in tree[1:]]
        if op == "+":
            return add(*kids)
        if op == "*":
            return mul(*kids)
        if op == "exp":
            (k,) = kids
            return exp(k)
        raise ValueError(f"unknown node {op!r}")
    return as_expr(tree)


# text form -----------------------------------------------------------------

def atom_text(x: Atom) -> str:
    if x.kind in (COORD, CONST):
        if x.kind == CONST and x.parity == ODD:
            return "~" + x.name
        return x.name
    if x.kind == FUNC:
        args = ", ".join(to_text(a) for a in x.args)
        if any(x.deriv):
            return f"{x.name}({args}; {', '.join(str(n) for n in x.deriv)})"
        return f"{x.name}({args})"
    if x.kind in (EXP, LOG):
        return f"{x.name}({to_text(x.args[0])})"
    raise TypeError(x.kind)  # pragma: no cover


def _coeff_text(c: GaussQ) -> str:
    s = str(c)
    return s


def _factors_text(k) -> list:
    b, o = k
    out = []
    for x, p in b:
        t = atom_text(x)
        out.append(t if p == 1 else f"{t}^{p}")
    for x in o:
        out.append(atom_text(x))
    return out


def _is_negative(c: GaussQ) -> bool:
    return c.re < 0 or (not c.re and c.im < 0)


def to_text(e) -> str:
    """Deterministic text form, parseable back by :mod:`supergc.parser`."""
    e = as_expr(e)
    if not e._t:
        return "0"
    pieces = []
    for i, (k, c) in enumerate(e.items()):
        neg = _is_negative(c) and i > 0
        cc = -c if neg else c
        fs = _factors_text(k)
        if not fs:
            body = _coeff_text(cc)
        elif cc == ONE:
            body = "*".join(fs)
        elif cc == _MINUS_ONE:
            b0, _ = k
            if b0 and b0[0][1] != 1:
                body = "-1*" + "*".join(fs)
            else:
                body = "-" + "*".join(fs)
        else:
            body = _coeff_text(cc) + "*" + "*".join(fs)
        if i == 0:
            pieces.append(body)
        else:
            pieces.append(("- " if neg else "+ ") + body)
    return " ".join(pieces)


def to_json(e) -> list:
    """JSON-ready list of ``{coeff:{re,im}, bosonic:[{atom,power}], odd:[atom]}``."""
    e = as_expr(e)
    out = []
    for (b, o), c in e.items():
        out.append({
            "coeff": {"re": str(c.re), "im": str(c.im)},
            "bosonic": [{"atom": atom_text(x), "power": p} for x, p in b],
            "odd": [atom_text(x) for x in o],
        })
    return out


def odd_product(atoms: Iterable) -> Expr:
    """Product of odd atoms in the given order (sign from sorting)."""
    atoms = tuple(atoms)
    s, srt = sort_odd(atoms)
    if not s:
        return Expr()
    return Expr({((), srt): ONE if s > 0 else _MINUS_ONE})
