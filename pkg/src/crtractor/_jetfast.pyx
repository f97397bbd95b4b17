# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated-polynomial product kernel (see crtractor._kernel)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def poly_mul_fast(a, b, cnp.int64_t[::1] mul_i, cnp.int64_t[::1] mul_j,
                  cnp.int64_t[::1] mul_k, Py_ssize_t n_out):
    if a.dtype.kind == "c" or b.dtype.kind == "c":
        return _poly_mul_cplx(np.ascontiguousarray(a, dtype=np.complex128),
                              np.ascontiguousarray(b, dtype=np.complex128),
                              mul_i, mul_j, mul_k, n_out)
    return _poly_mul_real(np.ascontiguousarray(a, dtype=np.float64),
                          np.ascontiguousarray(b, dtype=np.float64),
                          mul_i, mul_j, mul_k, n_out)


cdef _poly_mul_real(cnp.float64_t[::1] a, cnp.float64_t[::1] b,
                    cnp.int64_t[::1] mul_i, cnp.int64_t[::1] mul_j,
                    cnp.int64_t[::1] mul_k, Py_ssize_t n_out):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_out, dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t t, n = mul_i.shape[0]
    for t in range(n):
        o[mul_k[t]] += a[mul_i[t]] * b[mul_j[t]]
    return out


cdef _poly_mul_cplx(cnp.complex128_t[::1] a, cnp.complex128_t[::1] b,
                    cnp.int64_t[::1] mul_i, cnp.int64_t[::1] mul_j,
                    cnp.int64_t[::1] mul_k, Py_ssize_t n_out):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(n_out, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef Py_ssize_t t, n = mul_i.shape[0]
    for t in range(n):
        o[mul_k[t]] = o[mul_k[t]] + a[mul_i[t]] * b[mul_j[t]]
    return out
