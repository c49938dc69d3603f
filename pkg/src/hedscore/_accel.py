"""Backend selection for the hot loops.

Set ``HEDSCORE_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The numba
kernels are also skipped silently when numba cannot be imported.
"""
import os

_FLAG = "HEDSCORE_DISABLE_NUMBA"


def numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


def _load():
    if numba_requested():
        try:
            from hedscore import _numba_kernels as mod
        except ImportError:  # pragma: no cover - numba missing
            pass
        else:
            return "numba", mod
    from hedscore import _numpy_kernels as mod

    return "numpy", mod


BACKEND, kernels = _load()
