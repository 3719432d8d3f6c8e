# cython: language_level=3
"""Compiled hot loops: biquad cascade filtering and polyphase FIR resampling.

Mirrors the contracts of ``phaserepair._fallback`` exactly; the test
suite checks both backends against each other.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()


@cython.boundscheck(False)
@cython.wraparound(False)
def sosfilt(object sos, object x, object zi):
    """Apply a cascade of biquads (direct form II transposed) to ``x``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sos_ = np.ascontiguousarray(sos, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.array(x, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zi_ = np.ascontiguousarray(zi, dtype=np.float64)

    cdef Py_ssize_t n_sections = sos_.shape[0]
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t s, i
    cdef double b0, b1, b2, a1, a2, s1, s2, xn, yn

    for s in range(n_sections):
        b0 = sos_[s, 0]
        b1 = sos_[s, 1]
        b2 = sos_[s, 2]
        a1 = sos_[s, 4]
        a2 = sos_[s, 5]
        s1 = zi_[s, 0]
        s2 = zi_[s, 1]
        for i in range(n):
            xn = y[i]
            yn = b0 * xn + s1
            s1 = b1 * xn - a1 * yn + s2
            s2 = b2 * xn - a2 * yn
            y[i] = yn
    return y


@cython.boundscheck(False)
@cython.wraparound(False)
@cython.cdivision(True)
def polyphase_filter(object h, int up, int down, object x, Py_ssize_t n_out):
    """Zero-centered polyphase FIR resampling core.

    ``h`` is an odd-length kernel on the high-rate grid, centered at
    ``(len(h)-1)//2``; out-of-range input samples are treated as zero.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h_ = np.ascontiguousarray(h, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_ = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.zeros(n_out, dtype=np.float64)

    cdef Py_ssize_t half = (h_.shape[0] - 1) // 2
    cdef Py_ssize_t n_in = x_.shape[0]
    cdef Py_ssize_t j, i, i0, h_idx, pos
    cdef double acc

    for j in range(n_out):
        pos = j * down
        # Smallest input index whose kernel tap is in range.
        i0 = pos - half
        if i0 >= 0:
            i0 = (i0 + up - 1) // up
        else:
            i0 = -((-i0) // up)
        acc = 0.0
        i = i0
        h_idx = half + pos - i0 * up
        while h_idx >= 0:
            if 0 <= i < n_in:
                acc += h_[h_idx] * x_[i]
            i += 1
            h_idx -= up
        y[j] = acc
    return y
