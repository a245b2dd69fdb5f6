"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-numpy
fallback. Set SKETCHREC_PURE=1 to force the fallback (used by tests and
the benchmark to compare both paths).
"""

from __future__ import annotations

import os

if os.environ.get("SKETCHREC_PURE", "") == "1":
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

COMPILED: bool = bool(_impl.COMPILED)
lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward


def backend_name() -> str:
    return "compiled" if COMPILED else "pure-python"
