"""Numeric kernels with a compiled fast path.

The compiled extension (`_core`, built from `_core.pyx`) and the numpy
fallback (`_pycore`) expose the same four functions:

    mixture_pdf_batch(w, mu, var, x)
    adaptive_tv(w1, mu1, var1, w2, mu2, var2, breaks, tol)
    adaptive_scheffe(wt, mut, vart, wi, mui, vari, wj, muj, varj, breaks, tol)
    mde_max_scores(dens, cell_mass, emp)

Import-time selection: the compiled module wins when it is present unless
the environment variable PRIVGMM_PURE_PYTHON is set to a non-empty value
other than "0".
"""

import os

_forced_pure = os.environ.get("PRIVGMM_PURE_PYTHON", "0") not in ("", "0")

if _forced_pure:
    from . import _pycore as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pycore as _impl

mixture_pdf_batch = _impl.mixture_pdf_batch
adaptive_tv = _impl.adaptive_tv
adaptive_scheffe = _impl.adaptive_scheffe
mde_max_scores = _impl.mde_max_scores


def backend_name():
    """Return "native" for the compiled extension, "python" for the fallback."""
    return _impl.BACKEND


__all__ = [
    "mixture_pdf_batch",
    "adaptive_tv",
    "adaptive_scheffe",
    "mde_max_scores",
    "backend_name",
]
