# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled separable evaluation of the tensor-product operator sum.

For output point (p, q) the result is

    sum_a rw[p, a] * (sum_b grid[rs[p] + a, cs[q] + b] * cw[q, b])
    ---------------------------------------------------------------
                        rden[p] * cden[q]

with both sums accumulated left to right from 0.0.  The pure-Python fallback
and the pointwise evaluator use the same order, so all three agree bit for bit.
"""
import numpy as np
cimport cython
from cython.parallel import prange


def apply_separable(const double[:, ::1] grid,
                    const long long[::1] rs, const long long[::1] rl,
                    const double[:, ::1] rw, const double[::1] rden,
                    const long long[::1] cs, const long long[::1] cl,
                    const double[:, ::1] cw, const double[::1] cden):
    cdef Py_ssize_t P = rs.shape[0]
    cdef Py_ssize_t Q = cs.shape[0]
    out_arr = np.empty((P, Q), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t p, q, a, b, r, c0
    cdef double acc, inner

    for p in prange(P, nogil=True, schedule="static"):
        for q in range(Q):
            acc = 0.0
            c0 = cs[q]
            for a in range(rl[p]):
                r = rs[p] + a
                inner = 0.0
                for b in range(cl[q]):
                    inner = inner + grid[r, c0 + b] * cw[q, b]
                acc = acc + rw[p, a] * inner
            out[p, q] = acc / (rden[p] * cden[q])
    return out_arr
