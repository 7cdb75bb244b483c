"""Selects the compiled kernels when available, else the pure-Python twins.

Set ``PMAP_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

if os.environ.get("PMAP_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl

    COMPILED = False
else:
    try:
        from . import _kernels as _impl

        COMPILED = True
    except ImportError:
        from . import _pykernels as _impl

        COMPILED = False


def _vec(a):
    return np.ascontiguousarray(a, dtype=float)


def propagate(y0, k, nvar, nquad, t_out, rtol, atol, max_steps=10_000_000, h0=1e-3):
    return _impl.propagate(_vec(y0), k, nvar, nquad, _vec(t_out), rtol, atol, max_steps, h0)


def half_period(y0, k, rtol, atol, t_min, t_max, xtol=1e-14, max_steps=10_000_000, h0=1e-3):
    return _impl.half_period(_vec(y0), k, rtol, atol, t_min, t_max, xtol, max_steps, h0)


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    return _impl.jacobi_eigh(_vec(a), tol, max_sweeps)


__all__ = ["COMPILED", "half_period", "jacobi_eigh", "propagate"]
