"""Selects the compiled kernel core or the numpy fallback at import time.

Set ``MFSKIT_BACKEND=python`` or ``MFSKIT_BACKEND=compiled`` to force a
choice; default is the compiled core when the extension built.
"""

import os

_requested = os.environ.get("MFSKIT_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise ImportError(f"unknown MFSKIT_BACKEND value {_requested!r}")

if _requested == "python":
    from . import _core_py as core
    BACKEND = "python"
else:
    try:
        from . import _core as core  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _core_py as core  # type: ignore[no-redef]
        BACKEND = "python"
