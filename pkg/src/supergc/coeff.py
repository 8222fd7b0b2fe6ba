"""Exact Gaussian-rational coefficients."""

from __future__ import annotations

from fractions import Fraction

try:  # gmpy2's mpq is a drop-in, much faster rational
    from gmpy2 import mpq as Q
    from gmpy2 import mpz as _Z
except ImportError:  # pragma: no cover
    Q = Fraction  # type: ignore[misc,assignment]
    _Z = int

__all__ = ["Q", "GaussQ", "ZERO", "ONE", "I", "as_coeff"]

_Q0 = Q(0)
_Q1 = Q(1)


def _q(x) -> "Q":
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)


class GaussQ:
    """re + i*im with both parts exact rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is type(_Q0) else _q(re)
        self.im = im if type(im) is type(_Q0) else _q(im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussQ):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) or type(other) is type(_Q0):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return GaussQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_coeff(other) - self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not self.im and not other.im:
            return GaussQ(self.re * other.re, _Q0)
        return GaussQ(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussQ(self.re, -self.im)

    def inverse(self):
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero coefficient")
        return GaussQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * as_coeff(other).inverse()

    def __rtruediv__(self, other):
        return as_coeff(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_integer(self) -> bool:
        return not self.im and self.re.denominator == 1

    def is_real(self) -> bool:
        return not self.im

    def key(self):
        return (self.re, self.im)

    def __repr__(self):
        return f"GaussQ({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_str(self.im)
        return f"({self.re} + {_imag_str(self.im)})" if self.im > 0 else \
            f"({self.re} - {_imag_str(-self.im)})"


def _imag_str(q) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{q}*i"


def _coerce(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Fraction)) or type(x) in (type(_Q0), _Z):
        return GaussQ(x, _Q0)
    return None


def as_coeff(x) -> GaussQ:
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (float, complex)):
        raise TypeError("floating-point coefficients are not exact; use int or Fraction")
    return GaussQ(x, _Q0)


ZERO = GaussQ(0, 0)
ONE = GaussQ(1, 0)
I = GaussQ(0, 1)
