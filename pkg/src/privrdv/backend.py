"""Selects the hot-loop kernel implementation (numba JIT or pure numpy).

The environment variable ``PRIVRDV_BACKEND`` picks the backend at import
time: ``numba`` (default when numba is importable), ``numpy`` for the
vectorized fallback, or ``auto``.  Both backends consume the same
counter-based draw keys, so results agree across backends up to the last
bit of the transcendental functions used by Box-Muller; within one
backend results are bit-reproducible.

``benchmarks/bench_backends.py`` times the two implementations against
each other on the shipped workloads.
"""

from __future__ import annotations

import importlib
import os

ENV_VAR = "PRIVRDV_BACKEND"

_active = None
_active_name = None


def _numba_available() -> bool:
    try:
        importlib.import_module("numba")
    except ImportError:
        return False
    return True


def _resolve(name: str) -> str:
    name = name.strip().lower()
    if name in ("", "auto"):
        return "numba" if _numba_available() else "numpy"
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not _numba_available():
            raise ImportError(
                f"{ENV_VAR}=numba requested but numba is not importable"
            )
        return "numba"
    raise ValueError(f"unknown backend {name!r}; expected 'numba', 'numpy' or 'auto'")


def set_backend(name: str):
    """Force a backend by name; returns the kernel module."""
    global _active, _active_name
    resolved = _resolve(name)
    _active = importlib.import_module(f"privrdv._kernels_{resolved}")
    _active_name = resolved
    return _active


def kernels():
    """Return the active kernel module, initializing from the environment."""
    if _active is None:
        set_backend(os.environ.get(ENV_VAR, "auto"))
    return _active


def backend_name() -> str:
    kernels()
    return _active_name
