"""Hot kernel for the truncated polynomial product, with runtime selection.

The compiled Cython version (``crtractor._jetfast``) is used when available;
setting the environment variable ``CRTRACTOR_PURE=1`` forces the pure-numpy
fallback.  Both implement the same contract:

    out[k] = sum over pairs (i, j) with mul_k == k of a[i] * b[j]

where (mul_i, mul_j, mul_k) enumerate every monomial pair whose product stays
within the truncation order.
"""

from __future__ import annotations

import os

import numpy as np


def poly_mul_numpy(a, b, mul_i, mul_j, mul_k, n_out):
    w = a[mul_i] * b[mul_j]
    if w.dtype.kind == "c":
        return np.bincount(mul_k, weights=w.real, minlength=n_out) + 1j * np.bincount(
            mul_k, weights=w.imag, minlength=n_out
        )
    return np.bincount(mul_k, weights=w, minlength=n_out)


IMPLEMENTATION = "numpy"
poly_mul = poly_mul_numpy

if not os.environ.get("CRTRACTOR_PURE"):
    try:
        from ._jetfast import poly_mul_fast as _poly_mul_fast

        def poly_mul(a, b, mul_i, mul_j, mul_k, n_out):  # noqa: F811
            if a.dtype.kind == "c" or b.dtype.kind == "c":
                a = np.ascontiguousarray(a, dtype=np.complex128)
                b = np.ascontiguousarray(b, dtype=np.complex128)
            return _poly_mul_fast(a, b, mul_i, mul_j, mul_k, n_out)

        IMPLEMENTATION = "cython"
    except ImportError:
        pass
