"""Kernel dispatch: the compiled extension when importable, else pure Python.

Set PICARD_CYCLES_PURE=1 to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("PICARD_CYCLES_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

representation_counts = _impl.representation_counts
lemma46_sweep = _impl.lemma46_sweep
eval_series = _impl.eval_series

__all__ = ["BACKEND", "representation_counts", "lemma46_sweep", "eval_series"]
