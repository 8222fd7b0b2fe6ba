"""Fundamental forms and curvatures of classical and SUSY conformal surfaces."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import I
from .expr import EVEN, ODD, Expr, as_expr, constant, exp, inverse, to_text

HALF = Fraction(1, 2)

# displacements d+, d- are odd and anticommute; dd+ and dd- carry d+^2, d-^2
DP = constant("d+", ODD)
DM = constant("d-", ODD)
DDP = constant("dd+")
DDM = constant("dd-")


def _det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _mul2(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)]


@dataclass(frozen=True)
class CurvatureReport:
    gaussian: Expr
    mean: Expr
    umbilic: Expr  # H^2 - K
    extra: tuple = ()

    def to_json(self):
        out = {"gaussian": to_text(self.gaussian), "mean": to_text(self.mean),
               "H^2-K": to_text(self.umbilic)}
        out.update({k: to_text(v) for k, v in self.extra})
        return out


@dataclass(frozen=True)
class FundamentalForms:
    first: Expr
    second: Expr
    R: tuple
    S: tuple

    def to_json(self):
        return {"I": to_text(self.first), "II": to_text(self.second),
                "R": [[to_text(x) for x in r] for r in self.R],
                "S": [[to_text(x) for x in r] for r in self.S]}


# classical -------------------------------------------------------------------

def classical_B(u, Q, Qb, H):
    u, Q, Qb, H = (as_expr(x) for x in (u, Q, Qb, H))
    eu, emu = exp(u), exp(-u)
    return [[emu * (Q + Qb + eu * H), emu * (I * (Q - Qb))],
            [emu * (I * (Q - Qb)), emu * (-(Q + Qb) + eu * H)]]


def classical_curvatures(u, Q, Qb, H) -> CurvatureReport:
    """Mean curvature ½tr(B), Gaussian curvature det(B), and H² − 𝒦."""
    B = classical_B(u, Q, Qb, H)
    mean = HALF * (B[0][0] + B[1][1])
    K = _det2(B)
    return CurvatureReport(K, mean, mean * mean - K)


def classical_forms(u, Q, Qb, H):
    """First and second forms in dx, dy (even displacement atoms)."""
    dx, dy = constant("dx"), constant("dy")
    u = as_expr(u)
    first = exp(u) * (dx * dx + dy * dy)
    M = [[as_expr(Q) + Qb + exp(u) * H, I * (as_expr(Q) - Qb)],
         [I * (as_expr(Q) - Qb), -(as_expr(Q) + Qb) + exp(u) * H]]
    second = M[0][0] * dx * dx + 2 * M[0][1] * dx * dy + M[1][1] * dy * dy
    return first, second


# supersymmetric -----------------------------------------------------------------

def _fields(b):
    from .gc import normalize_bindings
    b = normalize_bindings(b)
    return b["phi"], b["Q+"], b["Q-"], b["H"], b["f"]


def metric_R(phi):
    e = HALF * exp(phi)
    return ((Expr(), e), (-e, Expr()))


def metric_R_inverse(phi):
    """Explicit inverse of R: only the off-diagonal entries ±2e^{-φ} survive."""
    e = 2 * exp(-as_expr(phi))
    return ((Expr(), -e), (e, Expr()))


def shape_S(phi, Qp, Qm, H):
    b12 = HALF * exp(phi) * H
    return ((as_expr(Qp), b12), (-b12, as_expr(Qm)))


def susy_forms(bindings) -> FundamentalForms:
    """I = f d+d- e^φ and II = f(d+²Q+ + d+d-(e^φH) + d-²Q-)."""
    phi, Qp, Qm, H, f = _fields(bindings)
    first = f * DP * DM * exp(phi)
    second = f * (DDP * Qp + DP * DM * (exp(phi) * H) + DDM * Qm)
    return FundamentalForms(first, second, metric_R(phi), shape_S(phi, Qp, Qm, H))


def susy_curvatures(bindings) -> CurvatureReport:
    """𝒦 = det(SR⁻¹), H = ½tr(SR⁻¹), plus the discriminants g and b."""
    phi, Qp, Qm, H, f = _fields(bindings)
    S = shape_S(phi, Qp, Qm, H)
    Rinv = metric_R_inverse(phi)
    M = _mul2(S, Rinv)
    K = _det2(M)
    mean = HALF * (M[0][0] + M[1][1])
    R = metric_R(phi)
    g = R[0][0] * R[1][1] + R[0][1] * R[0][1]
    b = S[0][0] * S[1][1] + S[0][1] * S[0][1]
    return CurvatureReport(K, mean, mean * mean - K, (("g", g), ("b", b)))


def curvature_identity(bindings) -> Expr:
    """det(SR⁻¹) − (4e^{−2φ}Q⁺Q⁻ + H²); zero for any fields."""
    phi, Qp, Qm, H, f = _fields(bindings)
    return susy_curvatures(bindings).gaussian - (4 * exp(-2 * phi) * Qp * Qm + H * H)


def check_R_inverse(phi) -> bool:
    prod = _mul2(metric_R(phi), metric_R_inverse(phi))
    return prod[0][0] == 1 and prod[1][1] == 1 and not prod[0][1] and not prod[1][0]


def curvature_report(record) -> dict:
    """Forms and curvatures of a solution record (SUSY or classical) as JSON."""
    from .gc import normalize_bindings, reduce_modulo_constraints
    red = lambda e: reduce_modulo_constraints(e, record.rules)
    b = normalize_bindings(record.bindings, record.variant)
    if record.variant == "classical":
        U = b["U"]
        from .expr import log
        u = log(U)
        rep = classical_curvatures(u, b["Q"], b["Qb"], b["H"])
        first, second = classical_forms(u, b["Q"], b["Qb"], b["H"])
        out = {"I": to_text(red(first)), "II": to_text(red(second))}
    else:
        rep = susy_curvatures(b)
        forms = susy_forms(b)
        out = {"I": to_text(red(forms.first)), "II": to_text(red(forms.second))}
    out.update({"gaussian": to_text(red(rep.gaussian)), "mean": to_text(red(rep.mean)),
                "H^2-K": to_text(red(rep.umbilic))})
    for k, v in rep.extra:
        out[k] = to_text(red(v))
    out["umbilic_along_K_zero"] = not red(rep.mean * rep.mean)
    return out


__all__ = ["DP", "DM", "DDP", "DDM", "CurvatureReport", "FundamentalForms", "classical_B",
           "classical_curvatures", "classical_forms", "metric_R", "metric_R_inverse",
           "shape_S", "susy_forms", "susy_curvatures", "curvature_identity",
           "check_R_inverse", "curvature_report"]
