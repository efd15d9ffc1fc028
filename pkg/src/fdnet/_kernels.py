"""Picks the compiled kernels when available, else the pure-Python ones.

Set ``FDNET_PURE=1`` to force the fallback.
"""

import os

from . import _pure

BACKEND = "python"
_impl = _pure

if os.environ.get("FDNET_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pure

pad_bits = _impl.pad_bits
unpad_bits = _impl.unpad_bits
push_all = _impl.push_all
drive = _impl.drive


def backends():
    """Available kernel modules by name."""
    found = {"python": _pure}
    try:
        from . import _speedups

        found["cython"] = _speedups
    except ImportError:
        pass
    return found
