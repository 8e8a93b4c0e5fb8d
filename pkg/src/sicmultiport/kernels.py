"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py`` is used.  Setting ``SICMULTIPORT_PURE_PYTHON=1``
forces the fallback.  Callers go through the wrappers below, which
normalize dtypes and contiguity so both backends see identical inputs.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("SICMULTIPORT_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def backend_module(name=None):
    """Return the kernel module named ``"cython"`` or ``"python"`` (default: active)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def apply_elements(kinds, m1, m2, params, states, impl=None):
    impl = impl or _impl
    out = np.ascontiguousarray(states, dtype=np.complex128).copy()
    impl.apply_elements(
        np.ascontiguousarray(kinds, dtype=np.int8),
        np.ascontiguousarray(m1, dtype=np.int64),
        np.ascontiguousarray(m2, dtype=np.int64),
        np.ascontiguousarray(params, dtype=np.float64),
        out,
    )
    return out


def purity_terms(p, lines, impl=None):
    """Return ``(h, jac, hess)`` for the quadratic and cubic purity constraints."""
    impl = impl or _impl
    p = np.ascontiguousarray(p, dtype=np.float64)
    n = p.size
    jac = np.empty((2, n))
    hess = np.empty((n, n))
    h = impl.purity_terms(p, np.ascontiguousarray(lines, dtype=np.int64), jac, hess)
    return np.array(h), jac, hess


def purity_residuals_batch(P, lines, impl=None):
    impl = impl or _impl
    return impl.purity_residuals_batch(
        np.ascontiguousarray(P, dtype=np.float64),
        np.ascontiguousarray(lines, dtype=np.int64),
    )
