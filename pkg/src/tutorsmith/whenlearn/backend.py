"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set TUTORSMITH_PURE=1 to force the numpy fallback (used by the equivalence
tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kern_py

if os.environ.get("TUTORSMITH_PURE", "").strip() not in ("", "0"):
    _impl = _kern_py
    BACKEND_NAME = "python"
else:
    try:
        from . import _kern as _impl  # type: ignore[no-redef]

        BACKEND_NAME = "compiled"
    except ImportError:
        _impl = _kern_py
        BACKEND_NAME = "python"

scan_splits = _impl.scan_splits
route_weights = _impl.route_weights
