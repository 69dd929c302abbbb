# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled 7-point stencil kernels.

These are the hot inner loops of every Krylov solve.  Each function has a
pure-NumPy twin with the same signature in ``partialdn._stencil_np``; the
backend is selected at import time by ``partialdn.kernels``.  All kernels
assume a zero halo (homogeneous Dirichlet); boundary data is folded into
right-hand sides outside the kernels.
"""

import numpy as np

cimport numpy as cnp


def apply7_const_real(const double[:, :, ::1] u, const double[:, :, ::1] diag, double w,
                      double[:, :, ::1] out):
    """out = diag*u + w * (sum of the 6 nearest neighbours)."""
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                s = 0.0
                if i > 0:
                    s += u[i - 1, j, k]
                if i < n0 - 1:
                    s += u[i + 1, j, k]
                if j > 0:
                    s += u[i, j - 1, k]
                if j < n1 - 1:
                    s += u[i, j + 1, k]
                if k > 0:
                    s += u[i, j, k - 1]
                if k < n2 - 1:
                    s += u[i, j, k + 1]
                out[i, j, k] = diag[i, j, k] * u[i, j, k] + w * s


def apply7_const_complex(const double complex[:, :, ::1] u, const double complex[:, :, ::1] diag,
                         double complex w, double complex[:, :, ::1] out):
    """Complex variant of apply7_const_real (same neighbour weight on all axes)."""
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double complex s
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                s = 0.0
                if i > 0:
                    s += u[i - 1, j, k]
                if i < n0 - 1:
                    s += u[i + 1, j, k]
                if j > 0:
                    s += u[i, j - 1, k]
                if j < n1 - 1:
                    s += u[i, j + 1, k]
                if k > 0:
                    s += u[i, j, k - 1]
                if k < n2 - 1:
                    s += u[i, j, k + 1]
                out[i, j, k] = diag[i, j, k] * u[i, j, k] + w * s


def apply7_axis_complex(const double complex[:, :, ::1] u, const double complex[:, :, ::1] diag,
                        double complex wxm, double complex wxp,
                        double complex wym, double complex wyp,
                        double complex wzm, double complex wzp,
                        double complex[:, :, ::1] out):
    """7-point apply with one complex weight per signed axis direction.

    ``wxm`` multiplies the neighbour at i-1, ``wxp`` the one at i+1, etc.
    Used for the advected (phase-conjugated) operators.
    """
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double complex s
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                s = 0.0
                if i > 0:
                    s += wxm * u[i - 1, j, k]
                if i < n0 - 1:
                    s += wxp * u[i + 1, j, k]
                if j > 0:
                    s += wym * u[i, j - 1, k]
                if j < n1 - 1:
                    s += wyp * u[i, j + 1, k]
                if k > 0:
                    s += wzm * u[i, j, k - 1]
                if k < n2 - 1:
                    s += wzp * u[i, j, k + 1]
                out[i, j, k] = diag[i, j, k] * u[i, j, k] + s


def apply7_var_real(const double[:, :, ::1] u, const double[:, :, ::1] diag,
                    const double[:, :, ::1] cxm, const double[:, :, ::1] cxp,
                    const double[:, :, ::1] cym, const double[:, :, ::1] cyp,
                    const double[:, :, ::1] czm, const double[:, :, ::1] czp,
                    double[:, :, ::1] out):
    """7-point apply with per-node neighbour coefficients (flux-form operators)."""
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                s = 0.0
                if i > 0:
                    s += cxm[i, j, k] * u[i - 1, j, k]
                if i < n0 - 1:
                    s += cxp[i, j, k] * u[i + 1, j, k]
                if j > 0:
                    s += cym[i, j, k] * u[i, j - 1, k]
                if j < n1 - 1:
                    s += cyp[i, j, k] * u[i, j + 1, k]
                if k > 0:
                    s += czm[i, j, k] * u[i, j, k - 1]
                if k < n2 - 1:
                    s += czp[i, j, k] * u[i, j, k + 1]
                out[i, j, k] = diag[i, j, k] * u[i, j, k] + s
