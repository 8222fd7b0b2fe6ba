"""3x3 graded matrices, the SUSY potential matrices and the zero-curvature residual."""

from __future__ import annotations

from fractions import Fraction

from .expr import EVEN, ODD, Expr, ParityError, as_expr, exp, to_text
from .superfield import apply_D

HALF = Fraction(1, 2)


class SuperMatrix:
    """Immutable 3x3 (or n x m) array of expressions with an optional parity pattern."""

    __slots__ = ("rows", "pattern")

    def __init__(self, rows, pattern=None):
        self.rows = tuple(tuple(as_expr(x) for x in r) for r in rows)
        self.pattern = pattern
        if pattern is not None:
            for i, r in enumerate(self.rows):
                for j, x in enumerate(r):
                    want = pattern[i][j]
                    if want is None or not x:
                        continue
                    if x.parity != want:
                        raise ParityError(
                            f"entry ({i + 1},{j + 1}) = {to_text(x)} should be "
                            f"{'odd' if want else 'even'}")

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, SuperMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __add__(self, other):
        return SuperMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return SuperMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return SuperMatrix([[-a for a in r] for r in self.rows])

    def __matmul__(self, other):
        return mat_mul(self, other)

    def scale(self, c):
        c = as_expr(c)
        return SuperMatrix([[c * a for a in r] for r in self.rows])

    def rscale(self, c):
        c = as_expr(c)
        return SuperMatrix([[a * c for a in r] for r in self.rows])

    def map(self, fn):
        return SuperMatrix([[fn(a) for a in r] for r in self.rows])

    def is_zero(self):
        return all(not a for r in self.rows for a in r)

    def to_json(self):
        return [[to_text(a) for a in r] for r in self.rows]

    def __repr__(self):
        return "SuperMatrix(" + repr(self.to_json()) + ")"


def identity(n=3):
    return SuperMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])


def zeros(n=3, m=None):
    return SuperMatrix([[0] * (m or n) for _ in range(n)])


def sign_matrix(eps, overall=1):
    """E = ±diag(1, 1, ε)."""
    if eps not in (1, -1) or overall not in (1, -1):
        raise ValueError("E entries must be ±1")
    return SuperMatrix([[overall, 0, 0], [0, overall, 0], [0, 0, overall * eps]])


def mat_mul(A: SuperMatrix, B: SuperMatrix) -> SuperMatrix:
    n, k = A.shape
    k2, m = B.shape
    if k != k2:
        raise ValueError("shape mismatch")
    rows = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = Expr()
            for t in range(k):
                acc = acc + A.rows[i][t] * B.rows[t][j]
            row.append(acc)
        rows.append(row)
    return SuperMatrix(rows)


def anti_commutator(A, B):
    return mat_mul(A, B) + mat_mul(B, A)


def commutator(A, B):
    return mat_mul(A, B) - mat_mul(B, A)


def apply_D_mat(sign, A: SuperMatrix) -> SuperMatrix:
    return A.map(lambda e: apply_D(sign, e))


def _need(name, e, parity):
    e = as_expr(e)
    if e and e.parity != parity:
        raise ParityError(f"{name} must be {'odd' if parity else 'even'}: {to_text(e)}")
    return e


def bosonic_A(R, S, T, Qp, Qm, H, phi, f):
    """Potential matrices A± of the bosonic extension.

    ``R``, ``S``, ``T`` are (plus, minus) pairs: R+ = Γ11¹, R- = Γ11², S+ = Γ12¹,
    S- = Γ12², T+ = Γ22¹, T- = Γ22².
    """
    Rp, Rm = (_need("R" + s, x, ODD) for s, x in zip("+-", R))
    Sp, Sm = (_need("S" + s, x, ODD) for s, x in zip("+-", S))
    Tp, Tm = (_need("T" + s, x, ODD) for s, x in zip("+-", T))
    Qp = _need("Q+", Qp, EVEN)
    Qm = _need("Q-", Qm, EVEN)
    H = _need("H", H, EVEN)
    phi = _need("φ", phi, EVEN)
    f = _need("f", f, EVEN)
    ep, em = exp(phi), exp(-phi)
    Ap = SuperMatrix([
        [Rp, Rm, Qp * f],
        [-Sp, -Sm, -HALF * ep * H * f],
        [H, 2 * em * Qp, 0],
    ])
    Am = SuperMatrix([
        [Sp, Sm, HALF * ep * H * f],
        [Tp, Tm, Qm * f],
        [-2 * em * Qm, H, 0],
    ])
    return Ap, Am


def fermionic_A(Rp, Tm, Qp, Qm, H, phi, f):
    """Potential matrices A± of the fermionic extension (R+ = Γ11¹, T- = Γ22²)."""
    Rp = _need("R+", Rp, ODD)
    Tm = _need("T-", Tm, ODD)
    Qp = _need("Q+", Qp, ODD)
    Qm = _need("Q-", Qm, ODD)
    H = _need("H", H, ODD)
    phi = _need("φ", phi, EVEN)
    f = _need("f", f, EVEN)
    ep, em = exp(phi), exp(-phi)
    Ap = SuperMatrix([
        [Rp, 0, Qp * f],
        [0, 0, -HALF * ep * H * f],
        [H, -2 * em * Qp, 0],
    ])
    Am = SuperMatrix([
        [0, 0, HALF * ep * H * f],
        [0, Tm, Qm * f],
        [-2 * em * Qm, -H, 0],
    ])
    return Ap, Am


def zcc_residual(Ap, Am, E=None) -> SuperMatrix:
    """D+A- + D-A+ - {EA+, EA-}; ``E`` defaults to the identity."""
    if E is None:
        EAp, EAm = Ap, Am
    else:
        EAp, EAm = mat_mul(E, Ap), mat_mul(E, Am)
    return apply_D_mat("+", Am) + apply_D_mat("-", Ap) - anti_commutator(EAp, EAm)


def blocks(A: SuperMatrix):
    """Split a 3x3 matrix as [[Af, Ib1], [Ib2, eta]] with a 2x2 upper-left block."""
    r = A.rows
    Af = SuperMatrix([r[0][:2], r[1][:2]])
    Ib1 = SuperMatrix([[r[0][2]], [r[1][2]]])
    Ib2 = SuperMatrix([r[2][:2]])
    eta = r[2][2]
    return Af, Ib1, Ib2, eta


def subblock_equations(Ap, Am):
    """The four block compatibility conditions for A± in subblock form.

    Returned as (2x2, 2x1, 1x2, scalar) residuals; they agree entrywise with
    the zero-curvature residual for E = diag(1, 1, -1).
    """
    Afp, I1p, I2p, ep = blocks(Ap)
    Afm, I1m, I2m, em = blocks(Am)
    D = apply_D_mat
    first = (D("+", Afm) + D("-", Afp) + mat_mul(I1m, I2p) + mat_mul(I1p, I2m)
             - anti_commutator(Afp, Afm))
    second = (-mat_mul(Afm, I1p) + D("+", I1m) + I1m.rscale(ep) - mat_mul(Afp, I1m)
              + D("-", I1p) + I1p.rscale(em))
    third = (D("+", I2m) + mat_mul(I2m, Afp) - I2p.scale(em) + D("-", I2p)
             + mat_mul(I2p, Afm) - I2m.scale(ep))
    fourth = ((mat_mul(I2p, I1m)).rows[0][0] + apply_D("-", ep)
              + (mat_mul(I2m, I1p)).rows[0][0] + apply_D("+", em))
    return first, second, third, fourth
