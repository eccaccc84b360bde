"""Kernel backend selection.

The compiled extension is preferred when present; set DISPATCHKIT_PURE=1
to force the pure-Python fallback (useful for debugging and for the
backend parity tests).  Both expose the same two functions with
identical semantics.
"""

from __future__ import annotations

import os

if os.environ.get("DISPATCHKIT_PURE", "").strip() not in ("", "0"):
    from . import pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND: str = _impl.BACKEND
evaluate_plan = _impl.evaluate_plan
solve_lattice = _impl.solve_lattice

__all__ = ["BACKEND", "evaluate_plan", "solve_lattice"]
