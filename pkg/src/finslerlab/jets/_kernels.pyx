# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled jet convolution kernel: the hot inner loop of jet propagation.

Semantics match finslerlab.jets._kernels_py.conv_batch: for every admissible
index split (k, i, j), out[b, k] += u[b, i] * w[b, j] over the batch."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def conv_batch(cplx[:, ::1] out, cplx[:, ::1] u, cplx[:, ::1] w,
               long[::1] kk, long[::1] ii, long[::1] jj):
    cdef Py_ssize_t B = u.shape[0]
    cdef Py_ssize_t T = kk.shape[0]
    cdef Py_ssize_t b, t
    with nogil:
        for b in range(B):
            for t in range(T):
                out[b, kk[t]] = out[b, kk[t]] + u[b, ii[t]] * w[b, jj[t]]
    return None
