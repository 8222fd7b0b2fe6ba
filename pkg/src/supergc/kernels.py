"""Select the compiled monomial kernels when built, else the Python ones.

Set ``SUPERGC_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("SUPERGC_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import merge_odd, merge_powers, sort_odd
else:
    try:
        from ._kernels import merge_odd, merge_powers, sort_odd
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import merge_odd, merge_powers, sort_odd

__all__ = ["BACKEND", "merge_odd", "merge_powers", "sort_odd"]
