"""Kernel backend selection.

The SGD inner loops dominate training time, so they ship in two flavors:
numba-compiled (default) and pure numpy. Set ``COLLABREC_BACKEND`` to
``numba``, ``numpy``, or ``auto`` before first use, or call
:func:`set_backend` from code (tests and the kernel benchmark do).
"""

from __future__ import annotations

import os

ENV_VAR = "COLLABREC_BACKEND"

_active = None


def _load(name: str):
    if name == "numba":
        from . import _kernels_numba as module
    elif name == "numpy":
        from . import _kernels_numpy as module
    else:
        raise ValueError(f"unknown backend {name!r}; use 'numba' or 'numpy'")
    return module


def get_kernels():
    """The active kernel module, resolving the env flag on first use."""
    global _active
    if _active is None:
        choice = os.environ.get(ENV_VAR, "auto").strip().lower()
        if choice == "auto":
            try:
                _active = _load("numba")
            except ImportError:
                _active = _load("numpy")
        else:
            _active = _load(choice)
    return _active


def set_backend(name: str | None) -> None:
    """Force a backend (``numba``/``numpy``), or ``None`` to re-resolve."""
    global _active
    _active = _load(name) if name is not None else None


def backend_name() -> str:
    return get_kernels().BACKEND
