"""Exact Grassmann-valued superspace calculus for supersymmetric surface equations."""

from .coeff import GaussQ, I
from .expr import (EVEN, ODD, CannotTerminate, Expr, Func, NotInvertible, ParityError,
                   constant, coordinate, diff, diff_odd, exp, inverse, log, substitute,
                   to_json, to_text)
from .kernels import BACKEND
from .parser import Env, ParseError, canon, parse, standard_env
from .superfield import TM, TP, XM, XP, apply_D, apply_J, recompose, theta_expand

__version__ = "0.1.0"

__all__ = [
    "GaussQ", "I", "EVEN", "ODD", "CannotTerminate", "Expr", "Func", "NotInvertible",
    "ParityError", "constant", "coordinate", "diff", "diff_odd", "exp", "inverse", "log",
    "substitute", "to_json", "to_text", "BACKEND", "Env", "ParseError", "canon", "parse",
    "standard_env", "TM", "TP", "XM", "XP", "apply_D", "apply_J", "recompose",
    "theta_expand", "__version__",
]
