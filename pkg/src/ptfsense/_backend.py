"""Kernel backend selection.

The hot loops exist twice: a numba ``@njit`` version and a pure-numpy
version.  ``PTFSENSE_BACKEND=numpy`` forces the numpy path at import time;
otherwise numba is used whenever it can be imported.  Both paths produce the
same numbers (tested), so the flag only trades speed for startup time.
"""

import os

_ENV_FLAG = "PTFSENSE_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def _initial_backend() -> str:
    requested = os.environ.get(_ENV_FLAG, "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {requested!r}")
    return "numba" if HAS_NUMBA else "numpy"


_current = _initial_backend()


def get_backend() -> str:
    return _current


def set_backend(name: str) -> str:
    """Switch backend for the running process; returns the previous one."""
    global _current
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    previous, _current = _current, name
    return previous
