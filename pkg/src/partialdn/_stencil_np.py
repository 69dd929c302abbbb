"""Pure-NumPy twins of the compiled stencil kernels in ``_stencil.pyx``.

Same signatures, same semantics: zero Dirichlet halo, boundary data is the
caller's business.  Used automatically when the compiled extension is absent
or when ``PARTIALDN_PURE_PYTHON`` is set.
"""

import numpy as np


def _neighbour_sum(u, out):
    out[1:, :, :] += u[:-1, :, :]
    out[:-1, :, :] += u[1:, :, :]
    out[:, 1:, :] += u[:, :-1, :]
    out[:, :-1, :] += u[:, 1:, :]
    out[:, :, 1:] += u[:, :, :-1]
    out[:, :, :-1] += u[:, :, 1:]
    return out


def apply7_const_real(u, diag, w, out):
    s = _neighbour_sum(u, np.zeros_like(u))
    np.multiply(diag, u, out=out)
    out += w * s


def apply7_const_complex(u, diag, w, out):
    s = _neighbour_sum(u, np.zeros_like(u))
    np.multiply(diag, u, out=out)
    out += w * s


def apply7_axis_complex(u, diag, wxm, wxp, wym, wyp, wzm, wzp, out):
    np.multiply(diag, u, out=out)
    out[1:, :, :] += wxm * u[:-1, :, :]
    out[:-1, :, :] += wxp * u[1:, :, :]
    out[:, 1:, :] += wym * u[:, :-1, :]
    out[:, :-1, :] += wyp * u[:, 1:, :]
    out[:, :, 1:] += wzm * u[:, :, :-1]
    out[:, :, :-1] += wzp * u[:, :, 1:]


def apply7_var_real(u, diag, cxm, cxp, cym, cyp, czm, czp, out):
    np.multiply(diag, u, out=out)
    out[1:, :, :] += cxm[1:, :, :] * u[:-1, :, :]
    out[:-1, :, :] += cxp[:-1, :, :] * u[1:, :, :]
    out[:, 1:, :] += cym[:, 1:, :] * u[:, :-1, :]
    out[:, :-1, :] += cyp[:, :-1, :] * u[:, 1:, :]
    out[:, :, 1:] += czm[:, :, 1:] * u[:, :, :-1]
    out[:, :, :-1] += czp[:, :, :-1] * u[:, :, 1:]
