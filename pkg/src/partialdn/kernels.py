"""Backend selection for the 7-point stencil kernels.

Prefers the compiled Cython extension; falls back to the pure-NumPy twins.
Set ``PARTIALDN_PURE_PYTHON=1`` to force the fallback (useful for the
kernel benchmark and for debugging).
"""

import os

import numpy as np

from . import _stencil_np

if os.environ.get("PARTIALDN_PURE_PYTHON"):
    _impl = _stencil_np
    BACKEND = "numpy"
else:
    try:
        from . import _stencil as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _stencil_np
        BACKEND = "numpy"


def apply7_const_real(u, diag, w, out=None):
    """out = diag*u + w*(sum of 6 neighbours), zero halo.  Real arrays."""
    if out is None:
        out = np.empty_like(u)
    _impl.apply7_const_real(u, diag, float(w), out)
    return out


def apply7_const_complex(u, diag, w, out=None):
    if out is None:
        out = np.empty_like(u)
    _impl.apply7_const_complex(u, diag, complex(w), out)
    return out


def apply7_axis_complex(u, diag, weights, out=None):
    """7-point apply with one complex weight per signed direction.

    ``weights`` is ((wxm, wxp), (wym, wyp), (wzm, wzp)); ``wxm`` multiplies
    the neighbour at i-1 and so on.
    """
    if out is None:
        out = np.empty_like(u)
    (wxm, wxp), (wym, wyp), (wzm, wzp) = weights
    _impl.apply7_axis_complex(u, diag, complex(wxm), complex(wxp), complex(wym),
                              complex(wyp), complex(wzm), complex(wzp), out)
    return out


def apply7_var_real(u, diag, coeffs, out=None):
    """7-point apply with per-node neighbour coefficient arrays.

    ``coeffs`` is ((cxm, cxp), (cym, cyp), (czm, czp)); ``cxm[i,j,k]``
    multiplies ``u[i-1,j,k]``.
    """
    if out is None:
        out = np.empty_like(u)
    (cxm, cxp), (cym, cyp), (czm, czp) = coeffs
    _impl.apply7_var_real(u, diag, cxm, cxp, cym, cyp, czm, czp, out)
    return out
