"""Numba switch.

Hot kernels are compiled with numba unless ``GINZBURG_DISABLE_NUMBA`` is set
to a truthy value (or numba is not importable), in which case the vectorized
numpy implementations are used instead.  ``GINZBURG_NUM_THREADS`` caps the
numba thread pool.
"""

from __future__ import annotations

import os

DISABLE_ENV = "GINZBURG_DISABLE_NUMBA"
THREADS_ENV = "GINZBURG_NUM_THREADS"

_TRUTHY = {"1", "true", "yes", "on"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(DISABLE_ENV, "").strip().lower() not in _TRUTHY


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Compilation is lazy, so decorating a function never costs anything when
    the numpy path is selected.
    """
    if not NUMBA_AVAILABLE:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


def configure_threads() -> int | None:
    """Apply ``GINZBURG_NUM_THREADS`` to numba; returns the value used."""
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
    if NUMBA_AVAILABLE:
        _numba.set_num_threads(min(n, _numba.config.NUMBA_NUM_THREADS))
    return n


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
