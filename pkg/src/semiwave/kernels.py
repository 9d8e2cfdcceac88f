"""Backend selection for the stepping loop.

The compiled extension is used when it imports; otherwise the NumPy
fallback. ``SEMIWAVE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

__all__ = ["BACKEND", "get_backend", "available_backends"]

_compiled = None
if not os.environ.get("SEMIWAVE_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None):
    """Module exposing ``advance`` and ``thomas_factor``."""
    name = name or BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
