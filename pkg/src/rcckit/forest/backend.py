"""Split-kernel backend selection at import time.

The compiled extension is preferred when importable; otherwise the numpy
fallback takes over. Set RCCKIT_SPLIT_BACKEND=python or =cython to force a
choice (forcing cython raises if the extension is missing). Both backends
produce bit-identical splits, so trained forests do not depend on which one
is active.
"""

import os

from . import _split_py

_requested = os.environ.get("RCCKIT_SPLIT_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _split_py
    _name = "python"
elif _requested == "cython":
    from . import _split_cy as _impl  # noqa: F401  (explicit request: fail loudly)

    _name = "cython"
elif _requested == "":
    try:
        from . import _split_cy as _impl
        _name = "cython"
    except ImportError:
        _impl = _split_py
        _name = "python"
else:
    raise RuntimeError(
        f"RCCKIT_SPLIT_BACKEND must be 'python' or 'cython', got {_requested!r}"
    )

best_split = _impl.best_split


def active_backend() -> str:
    return _name
