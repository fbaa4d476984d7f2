"""Backend selection for the batch chord solver.

The compiled extension is used when it imports; otherwise (or when the
``FUNKHILBERT_PURE`` environment variable is set to a non-empty value other
than ``0``) the numpy implementation takes over.  Both expose the same
``solve_forward`` signature.
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("FUNKHILBERT_PURE", "") not in ("", "0")

if _force_pure:
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

if _compiled is not None:
    solve_forward = _compiled.solve_forward
    BACKEND = "compiled"
else:
    solve_forward = _kernels_py.solve_forward
    BACKEND = "python"

solve_forward_py = _kernels_py.solve_forward
solve_forward_compiled = None if _compiled is None else _compiled.solve_forward

__all__ = ["BACKEND", "solve_forward", "solve_forward_py", "solve_forward_compiled"]
