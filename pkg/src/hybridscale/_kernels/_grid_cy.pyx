# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trilinear interpolation kernel.

Keeps the exact expression order of _grid_py.py so both backends return
identical doubles (plain SSE2 arithmetic, no FMA contraction at -O2 here).
"""


cdef inline void _locate(const double[::1] axis, double x,
                         Py_ssize_t *lo_out, Py_ssize_t *hi_out, double *t_out) nogil:
    cdef Py_ssize_t n = axis.shape[0]
    cdef Py_ssize_t last = n - 1
    cdef Py_ssize_t lo, hi, mid
    if x <= axis[0]:
        lo_out[0] = 0; hi_out[0] = 0; t_out[0] = 0.0
        return
    if x >= axis[last]:
        lo_out[0] = last; hi_out[0] = last; t_out[0] = 0.0
        return
    lo = 0
    hi = last
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if axis[mid] <= x:
            lo = mid
        else:
            hi = mid
    if axis[lo] == x:
        lo_out[0] = lo; hi_out[0] = lo; t_out[0] = 0.0
        return
    lo_out[0] = lo
    hi_out[0] = hi
    t_out[0] = (x - axis[lo]) / (axis[hi] - axis[lo])


cdef inline double _interp3(const double[::1] b_axis, const double[::1] s_axis,
                            const double[::1] q_axis, const double[:, :, ::1] v,
                            double b, double s, double q) nogil:
    cdef Py_ssize_t i0, i1, j0, j1, k0, k1
    cdef double tb, ts, tq
    cdef double c00, c01, c10, c11, c0, c1
    _locate(b_axis, b, &i0, &i1, &tb)
    _locate(s_axis, s, &j0, &j1, &ts)
    _locate(q_axis, q, &k0, &k1, &tq)
    c00 = v[i0, j0, k0] + (v[i0, j0, k1] - v[i0, j0, k0]) * tq
    c01 = v[i0, j1, k0] + (v[i0, j1, k1] - v[i0, j1, k0]) * tq
    c10 = v[i1, j0, k0] + (v[i1, j0, k1] - v[i1, j0, k0]) * tq
    c11 = v[i1, j1, k0] + (v[i1, j1, k1] - v[i1, j1, k0]) * tq
    c0 = c00 + (c01 - c00) * ts
    c1 = c10 + (c11 - c10) * ts
    return c0 + (c1 - c0) * tb


def locate(const double[::1] axis, double x):
    cdef Py_ssize_t lo, hi
    cdef double t
    _locate(axis, x, &lo, &hi, &t)
    return lo, hi, t


def interp3(const double[::1] b_axis, const double[::1] s_axis,
            const double[::1] q_axis, const double[:, :, ::1] values,
            double b, double s, double q):
    return _interp3(b_axis, s_axis, q_axis, values, b, s, q)


def interp3_many(const double[::1] b_axis, const double[::1] s_axis,
                 const double[::1] q_axis, const double[:, :, ::1] values,
                 const double[:, ::1] coords, double[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            out[i] = _interp3(b_axis, s_axis, q_axis, values,
                              coords[i, 0], coords[i, 1], coords[i, 2])
