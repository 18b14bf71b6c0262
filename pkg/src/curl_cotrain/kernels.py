"""Backend selection for the numerical kernels.

The compiled ``_speedups`` extension is used when importable; otherwise the
NumPy fallback in ``_kernels_py``. Set ``CURL_COTRAIN_PURE=1`` to force the
fallback. Both backends agree to rounding error, not bit for bit, so runs are
reproducible per backend.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("CURL_COTRAIN_PURE"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python"), or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _speedups

        return _speedups
    raise ValueError(f"unknown kernel backend {name!r}")


def softmax_loss_grad(params, X, y, n_classes, inv_c):
    return _impl.softmax_loss_grad(
        np.ascontiguousarray(params, dtype=np.float64),
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        int(n_classes),
        float(inv_c),
    )


def seed_diversity(X, seeds):
    return float(
        _impl.seed_diversity(
            np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(seeds, dtype=np.int64)
        )
    )


def expand_prototypes(X, seeds, n):
    return _impl.expand_prototypes(
        np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(seeds, dtype=np.int64), int(n)
    )
