"""Kernel selection: compiled extension when available, numpy fallback else.

Set GDKKT_FORCE_PYTHON=1 to skip the extension (used by the benchmark and
the kernel-equivalence tests).
"""

import os

from .fallback import (  # noqa: F401
    GRAD_SCALE,
    ScanTables,
    TYPE_CODE,
    build_tables,
    gap_check,
    regime_values,
)
from . import fallback as _fallback

if os.environ.get("GDKKT_FORCE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _fallback

IMPL = _impl.IMPL
classify_window = _impl.classify_window
scan_cells = _impl.scan_cells
newton_cells = _impl.newton_cells
eval_linear_program = _impl.eval_linear_program


def python_impl():
    return _fallback
