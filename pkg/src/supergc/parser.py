"""Surface syntax for graded expressions.

Grammar (lowest to highest precedence)::

    sum     := product (('+' | '-') product)*
    product := power (('*' | '/') power)*
    power   := unary ('^' unary)?
    unary   := '-' unary | atom
    atom    := number | 'i' | name | '~' name | call | '(' sum ')'
    call    := name '(' sum (',' sum)* (';' int (',' int)*)? ')'

Unary minus binds tighter than ``^``, so the printer writes ``-1*a^2`` for a
negated power.  An identifier followed directly by ``+`` or ``-`` is read as
one name when that name is declared (``x+``, ``θ-``, ``Q+``).  Built-in calls
are ``exp``, ``log``, ``D+``, ``D-``, ``J+``, ``J-`` and ``d<coord>`` for any
declared coordinate (``dx+``, ``dθ-``, ``dxi``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coeff import I
from .expr import (COORD, EVEN, ODD, CannotTerminate, Expr, Func,
                   NotInvertible, ParityError, as_expr, atom_of, constant, coordinate,
                   diff, diff_odd, dummy, exp, inverse, log, power, to_text)
from .superfield import TM, TP, XM, XP, Z, ZB, apply_D, apply_J


class ParseError(ValueError):
    """Syntax or semantic error tagged with a 1-based line and column."""

    def __init__(self, msg, text="", pos=0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.col, self.msg = line, col, msg
        super().__init__(f"{line}:{col}: {msg}")


@dataclass
class Env:
    """Declared names: ``symbols`` map to expressions, ``funcs`` to :class:`Func`."""

    symbols: dict = field(default_factory=dict)
    funcs: dict = field(default_factory=dict)
    auto: bool = False  # undeclared names become even constants / even functions

    def copy(self):
        return Env(dict(self.symbols), dict(self.funcs), self.auto)

    def declare_const(self, name, parity=EVEN, bodiless=False, nilpotency=None):
        key = name.lstrip("~")
        e = constant(key, parity, bodiless=bodiless, nilpotency=nilpotency)
        self.symbols[key] = e
        return e

    def declare_coord(self, name, parity=EVEN):
        e = coordinate(name, parity)
        self.symbols[name] = e
        return e

    def declare_func(self, func: Func):
        self.funcs[func.name] = func
        return func

    def bind(self, name, value):
        self.symbols[name] = as_expr(value)

    def coordinates(self):
        out = {}
        for n, e in self.symbols.items():
            try:
                a = atom_of(e)
            except ValueError:
                continue
            if a.kind == COORD and a.name == n:
                out[n] = a
        return out


def standard_env(auto=False) -> Env:
    env = Env(auto=auto)
    for e in (XP, XM, TP, TM, Z, ZB):
        env.symbols[str(e)] = e
    for i in range(1, 10):
        env.symbols[f"#{i}"] = dummy(i)
    return env


_OPS = ("D+", "D-", "J+", "J-")
_SIGNS = {"+": "+", "-": "-", "−": "-"}
_PUNCT = set("()*/^,;~")


def _is_name_start(ch):
    return ch.isalpha() or ch in "_#"


def _is_name_char(ch):
    return ch.isalnum() or ch in "_'#"


class _Lexer:
    def __init__(self, text, env):
        self.text = text
        self.env = env
        self.toks = []
        self._run()

    def _joinable(self, name):
        # a declared signed name, or a signed built-in / derivative operator head
        env = self.env
        if name in env.symbols or name in env.funcs or name in _OPS:
            return True
        return name.startswith("d") and name[1:] in env.symbols

    def _run(self):
        t, n, i = self.text, len(self.text), 0
        while i < n:
            ch = t[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < n and t[j].isdigit():
                    j += 1
                self.toks.append(("num", t[i:j], i))
                i = j
                continue
            if _is_name_start(ch):
                j = i
                while j < n and _is_name_char(t[j]):
                    j += 1
                name = t[i:j]
                if j < n and t[j] in _SIGNS:
                    signed = name + _SIGNS[t[j]]
                    if self._joinable(signed):
                        name, j = signed, j + 1
                self.toks.append(("name", name, i))
                i = j
                continue
            if ch in _SIGNS:
                self.toks.append(("op", _SIGNS[ch], i))
                i += 1
                continue
            if ch in _PUNCT:
                self.toks.append(("op", ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", t, i)
        self.toks.append(("end", "", n))


class _Parser:
    def __init__(self, text, env):
        self.text = text
        self.env = env
        self.toks = _Lexer(text, env).toks
        self.k = 0

    # token helpers
    def peek(self, off=0):
        return self.toks[min(self.k + off, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def expect(self, val):
        tok = self.take()
        if tok[1] != val or tok[0] == "end":
            raise ParseError(f"expected {val!r}, found {tok[1] or 'end of input'!r}",
                             self.text, tok[2])
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.text, tok[2])

    # grammar
    def parse(self):
        e = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}")
        return e

    def sum(self):
        e = self.product()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            r = self.product()
            e = e + r if op == "+" else e - r
        return e

    def product(self):
        e = self.power()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            r = self.power()
            if tok[1] == "*":
                e = e * r
            else:
                e = self._guard(tok, lambda: e * inverse(r))
        return e

    def power(self):
        base = self.unary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            tok = self.take()
            ex = self.unary()
            return self._guard(tok, lambda: _raise(base, ex))
        return base

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Expr.const(int(val))
        if kind == "op" and val == "(":
            e = self.sum()
            self.expect(")")
            return e
        if kind == "op" and val == "~":
            nt = self.take()
            if nt[0] != "name":
                raise ParseError("expected a name after '~'", self.text, nt[2])
            return self._odd_const(nt)
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(tok)
            return self._name(tok)
        raise ParseError(f"unexpected {val or 'end of input'!r}", self.text, pos)

    def _odd_const(self, tok):
        name = tok[1]
        e = self.env.symbols.get(name)
        if e is None:
            if not self.env.auto:
                raise ParseError(f"unknown symbol ~{name}", self.text, tok[2])
            e = self.env.declare_const(name, ODD)
        if e.parity != ODD:
            raise ParseError(f"~{name} is not an odd constant", self.text, tok[2])
        return e

    def _name(self, tok):
        name = tok[1]
        if name == "i" and "i" not in self.env.symbols:
            return Expr.const(I)
        e = self.env.symbols.get(name)
        if e is not None:
            return e
        if name in self.env.funcs:
            raise ParseError(f"function {name} needs arguments", self.text, tok[2])
        if self.env.auto:
            return self.env.declare_const(name)
        raise ParseError(f"unknown symbol {name}", self.text, tok[2])

    def _args(self):
        self.expect("(")
        args = [self.sum()]
        deriv = None
        while self.peek()[1] == ",":
            self.take()
            args.append(self.sum())
        if self.peek()[1] == ";":
            self.take()
            deriv = [self._int()]
            while self.peek()[1] == ",":
                self.take()
                deriv.append(self._int())
        self.expect(")")
        return args, deriv

    def _int(self):
        tok = self.take()
        if tok[0] != "num":
            raise ParseError("derivative indices must be non-negative integers",
                             self.text, tok[2])
        return int(tok[1])

    def call(self, tok):
        name = tok[1]
        args, deriv = self._args()

        def one():
            if len(args) != 1 or deriv is not None:
                raise ParseError(f"{name} takes one argument", self.text, tok[2])
            return args[0]

        if name in self.env.funcs:
            f = self.env.funcs[name]
            return self._guard(tok, lambda: f(*args, d=deriv))
        if name == "exp":
            a = one()
            return self._guard(tok, lambda: exp(a))
        if name == "log":
            a = one()
            return self._guard(tok, lambda: log(a))
        if name in ("D+", "D-"):
            return apply_D(name[1], one())
        if name in ("J+", "J-"):
            return apply_J(name[1], one())
        if name.startswith("d") and name[1:] in self.env.coordinates():
            a = self.env.coordinates()[name[1:]]
            x = one()
            return diff_odd(x, a) if a.parity == ODD else diff(x, a)
        if name in self.env.symbols:
            raise ParseError(f"{name} is not a function", self.text, tok[2])
        if self.env.auto:
            f = self.env.declare_func(Func(name, EVEN, arity=len(args)))
            return self._guard(tok, lambda: f(*args, d=deriv))
        raise ParseError(f"unknown function {name}", self.text, tok[2])

    def _guard(self, tok, fn):
        try:
            return fn()
        except (ParityError, NotInvertible, CannotTerminate, TypeError, ValueError) as err:
            if isinstance(err, ParseError):
                raise
            raise ParseError(str(err), self.text, tok[2]) from err


def _raise(base: Expr, ex: Expr) -> Expr:
    if ex.is_monomial() or not ex:
        if not ex:
            return Expr.const(1)
        (k, c), = ex.items()
        if k == ((), ()) and not c.im and c.re.denominator == 1:
            return power(base, int(c.re))
    # non-integer exponent: x^p = exp(p log x)
    return exp(ex * log(base))


def parse(text: str, env: Env | None = None) -> Expr:
    """Parse and evaluate ``text`` to a canonical expression."""
    env = env if env is not None else standard_env()
    return _Parser(text, env).parse()


def canon(text: str) -> str:
    """Canonical text of an expression over auto-declared symbols."""
    return to_text(parse(text, standard_env(auto=True)))


__all__ = ["ParseError", "Env", "standard_env", "parse", "canon"]
