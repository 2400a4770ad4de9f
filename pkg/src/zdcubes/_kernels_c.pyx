# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Semantics match _kernels_py exactly; see that module
for the packed-array layout."""

import numpy as np


def enumerate_blocks(int[:, ::1] pow_stack, int[::1] offsets,
                     int[:, ::1] combos, int[::1] bases):
    cdef Py_ssize_t n_bases = bases.shape[0]
    cdef Py_ssize_t n_combos = combos.shape[0]
    cdef Py_ssize_t k = combos.shape[1]
    cdef Py_ssize_t width = 1 << k
    out_arr = np.empty((n_bases * n_combos, width), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    cdef Py_ssize_t b, r, i, t, size, row
    cdef Py_ssize_t prow
    with nogil:
        for b in range(n_bases):
            for r in range(n_combos):
                row = b * n_combos + r
                out[row, 0] = bases[b]
                size = 1
                for i in range(k):
                    prow = offsets[i] + combos[r, i]
                    for t in range(size):
                        out[row, size + t] = pow_stack[prow, out[row, t]]
                    size <<= 1
    return out_arr


def template_scan(int[:, ::1] points, int[:, ::1] eq_pairs,
                  Py_ssize_t x_pos, Py_ssize_t y_pos):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = eq_pairs.shape[0]
    cdef Py_ssize_t i, j
    cdef bint ok
    hits_arr = np.empty((n, 2), dtype=np.int32)
    cdef int[:, ::1] hits = hits_arr
    cdef Py_ssize_t count = 0
    with nogil:
        for i in range(n):
            ok = True
            for j in range(m):
                if points[i, eq_pairs[j, 0]] != points[i, eq_pairs[j, 1]]:
                    ok = False
                    break
            if ok:
                hits[count, 0] = points[i, x_pos]
                hits[count, 1] = points[i, y_pos]
                count += 1
    return hits_arr[:count].copy()
