"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``SPINWN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
mul_terms = _kernels_py.mul_terms
commutator_terms = _kernels_py.commutator_terms

if os.environ.get("SPINWN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on build environment
        _compiled = None
    if _compiled is not None:
        mul_terms = _compiled.mul_terms
        commutator_terms = _compiled.commutator_terms
        BACKEND = "compiled"

__all__ = ["BACKEND", "mul_terms", "commutator_terms"]
