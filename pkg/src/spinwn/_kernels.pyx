# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fermionic string-product kernel (mirrors ``_kernels_py``)."""

from libc.math cimport fabs
from libc.stdint cimport uint64_t
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref, preincrement as inc

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

cdef double ZERO_TOL = 1e-14


cdef inline int mode_sign(uint64_t cre, uint64_t ann) nogil:
    cdef int inv = 0
    cdef uint64_t c = cre
    cdef int i
    while c:
        i = __builtin_ctzll(c)
        inv += __builtin_popcountll(ann & ((<uint64_t>1 << i) - 1))
        c &= c - 1
    return -1 if (inv & 1) else 1


cdef inline void accumulate(unordered_map[uint64_t, double]& acc,
                            uint64_t xc, uint64_t xa, uint64_t yc, uint64_t ya,
                            double coef) nogil:
    cdef uint64_t xn = xc & xa
    cdef uint64_t xc_ = xc & ~xn
    cdef uint64_t xa_ = xa & ~xn
    cdef uint64_t yn = yc & ya
    cdef uint64_t yc_ = yc & ~yn
    cdef uint64_t ya_ = ya & ~yn
    if (xc_ & yc_) | (xc_ & yn) | (xa_ & ya_) | (xn & ya_):
        return
    cdef int sign = mode_sign(xc, xa) * mode_sign(yc, ya)
    cdef uint64_t ux = xc | xa
    cdef uint64_t uy = yc | ya
    cdef uint64_t rc = (xc_ & ~uy) | (yc_ & ~ux) | (xn & yc_)
    cdef uint64_t ra = (xa_ & ~uy) | (ya_ & ~ux) | (xa_ & yn)
    cdef uint64_t rn = (xn & ~uy) | (yn & ~ux) | (xc_ & ya_) | (xn & yn)
    cdef uint64_t rh = xa_ & yc_
    cdef uint64_t odd_x = xc_ | xa_
    cdef uint64_t m = yc_ | ya_
    cdef int inv = 0
    cdef int i
    while m:
        i = __builtin_ctzll(m)
        inv += __builtin_popcountll(odd_x >> (i + 1))
        m &= m - 1
    if inv & 1:
        sign = -sign
    cdef uint64_t sub = rh
    cdef uint64_t nm, cre, ann
    cdef int s
    while True:
        nm = rn | sub
        cre = rc | nm
        ann = ra | nm
        s = sign * mode_sign(cre, ann)
        if __builtin_popcountll(sub) & 1:
            s = -s
        acc[(cre << 32) | ann] += s * coef
        if sub == 0:
            break
        sub = (sub - 1) & rh


cdef dict _to_dict(unordered_map[uint64_t, double]& acc):
    cdef dict out = {}
    cdef unordered_map[uint64_t, double].iterator it = acc.begin()
    cdef uint64_t key
    cdef double v
    while it != acc.end():
        v = deref(it).second
        if fabs(v) >= ZERO_TOL:
            key = deref(it).first
            out[(int(key >> 32), int(key & 0xFFFFFFFF))] = v
        inc(it)
    return out


cdef void _fill(dict d, uint64_t[::1] c, uint64_t[::1] a, double[::1] v):
    cdef Py_ssize_t k = 0
    for key, val in d.items():
        c[k] = key[0]
        a[k] = key[1]
        v[k] = val
        k += 1


def mul_terms(dict x, dict y):
    """Product of two term maps ``{(cre, ann): coeff}`` (register size <= 32)."""
    import numpy as np
    cdef Py_ssize_t nx = len(x), ny = len(y), i, j
    xc_arr = np.empty(nx, dtype=np.uint64); xa_arr = np.empty(nx, dtype=np.uint64)
    xv_arr = np.empty(nx, dtype=np.float64)
    yc_arr = np.empty(ny, dtype=np.uint64); ya_arr = np.empty(ny, dtype=np.uint64)
    yv_arr = np.empty(ny, dtype=np.float64)
    cdef uint64_t[::1] xc = xc_arr, xa = xa_arr, yc = yc_arr, ya = ya_arr
    cdef double[::1] xv = xv_arr, yv = yv_arr
    _fill(x, xc, xa, xv)
    _fill(y, yc, ya, yv)
    cdef unordered_map[uint64_t, double] acc
    with nogil:
        for i in range(nx):
            for j in range(ny):
                accumulate(acc, xc[i], xa[i], yc[j], ya[j], xv[i] * yv[j])
    return _to_dict(acc)


def commutator_terms(dict x, dict y):
    """Term map of ``xy - yx``."""
    import numpy as np
    cdef Py_ssize_t nx = len(x), ny = len(y), i, j
    xc_arr = np.empty(nx, dtype=np.uint64); xa_arr = np.empty(nx, dtype=np.uint64)
    xv_arr = np.empty(nx, dtype=np.float64)
    yc_arr = np.empty(ny, dtype=np.uint64); ya_arr = np.empty(ny, dtype=np.uint64)
    yv_arr = np.empty(ny, dtype=np.float64)
    cdef uint64_t[::1] xc = xc_arr, xa = xa_arr, yc = yc_arr, ya = ya_arr
    cdef double[::1] xv = xv_arr, yv = yv_arr
    _fill(x, xc, xa, xv)
    _fill(y, yc, ya, yv)
    cdef unordered_map[uint64_t, double] acc
    with nogil:
        for i in range(nx):
            for j in range(ny):
                accumulate(acc, xc[i], xa[i], yc[j], ya[j], xv[i] * yv[j])
                accumulate(acc, yc[j], ya[j], xc[i], xa[i], -xv[i] * yv[j])
    return _to_dict(acc)
