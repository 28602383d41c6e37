"""Kernel backend selection.

The compiled extension is preferred when built; the pure-Python fallback is
selected otherwise.  Set NQP_SOR_BACKEND=python or =compiled to force one
(the benchmark uses this to compare the two).
"""

import os

_requested = os.environ.get("NQP_SOR_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as _impl
    BACKEND = "python"
elif _requested in ("", "compiled"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as _impl
        BACKEND = "python"
else:
    raise RuntimeError(
        f"NQP_SOR_BACKEND={_requested!r}: expected 'python' or 'compiled'"
    )

psor_sweep = _impl.psor_sweep
csc_normal_sweep = _impl.csc_normal_sweep
stamp_normal_sweep = _impl.stamp_normal_sweep
