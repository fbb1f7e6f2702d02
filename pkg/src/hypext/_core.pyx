# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics mirror ``hypext._kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport asinh, sinh, exp, log, log1p, sqrt, fabs

cnp.import_array()

cdef double _LN2 = 0.6931471805599453
cdef double _LARGE = 30.0


cdef inline double _asinh_from_log(double lnz) noexcept nogil:
    if lnz > 20.0:
        return lnz + log1p(sqrt(1.0 + exp(-2.0 * lnz)))
    return asinh(exp(lnz))


cdef inline double _asinh_sinh_scaled(double a, double c) noexcept nogil:
    cdef double lnz
    if a <= _LARGE:
        return asinh(sinh(a) * c)
    if c == 0.0:
        return 0.0
    lnz = a - _LN2 + log1p(-exp(-2.0 * a)) + log(c)
    return _asinh_from_log(lnz)


def asinh_sinh_scaled(a, c):
    a, c = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(c, dtype=np.float64))
    shape = a.shape
    cdef const double[::1] av = np.ascontiguousarray(a).ravel()
    cdef const double[::1] cv = np.ascontiguousarray(c).ravel()
    out = np.empty(av.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = av.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _asinh_sinh_scaled(av[i], cv[i])
    return out.reshape(shape)


def asinh_from_log(lnz):
    lnz = np.asarray(lnz, dtype=np.float64)
    shape = lnz.shape
    cdef const double[::1] lv = np.ascontiguousarray(lnz).ravel()
    out = np.empty(lv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = lv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _asinh_from_log(lv[i])
    return out.reshape(shape)


def chart_components(xi, int axis, double sign, G):
    cdef const double[:, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[:, :, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t N = X.shape[0], d = X.shape[1]
    out = np.empty((N, d, d))
    cdef double[:, :, ::1] O = out
    cdef double[64] v
    cdef int[64] keep
    cdef Py_ssize_t p, i, j, ki, kj, jj = 0
    cdef double q, gii
    if d >= 64:
        raise ValueError("chart dimension too large")
    for j in range(d + 1):
        if j != axis:
            keep[jj] = <int>j
            jj += 1
    with nogil:
        for p in range(N):
            q = 0.0
            for i in range(d):
                q += X[p, i] * X[p, i]
            q = sqrt(1.0 - q)
            for i in range(d):
                v[i] = -sign * X[p, i] / q
            gii = Gv[p, axis, axis]
            for i in range(d):
                ki = keep[i]
                for j in range(d):
                    kj = keep[j]
                    O[p, i, j] = (Gv[p, ki, kj] + v[i] * Gv[p, axis, kj]
                                  + Gv[p, ki, axis] * v[j] + gii * v[i] * v[j])
    return out


def join_ambient(X, int k, a, c, Hb):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t N = Xv.shape[0], m = Xv.shape[1], n = m - k
    cdef const double[::1] av = np.broadcast_to(np.asarray(a, dtype=np.float64), (N,)).copy()
    cdef const double[::1] cv = np.broadcast_to(np.asarray(c, dtype=np.float64), (N,)).copy()
    cdef const double[:, :, ::1] H = np.ascontiguousarray(Hb, dtype=np.float64)
    out = np.zeros((N, m, m))
    cdef double[:, :, ::1] O = out
    cdef double[64] w
    cdef double[64] u
    cdef double[64] nu
    cdef double[64] Hu
    cdef Py_ssize_t p, i, j
    cdef double n1, n2, fa, fb, uHu
    if m >= 64:
        raise ValueError("ambient dimension too large")
    with nogil:
        for p in range(N):
            n1 = 0.0
            n2 = 0.0
            for i in range(k):
                n1 += Xv[p, i] * Xv[p, i]
            for i in range(n):
                n2 += Xv[p, k + i] * Xv[p, k + i]
            n1 = sqrt(n1)
            n2 = sqrt(n2)
            for i in range(k):
                w[i] = Xv[p, i] / n1
                nu[i] = -n2 * w[i]
            for i in range(n):
                u[i] = Xv[p, k + i] / n2
                nu[k + i] = n1 * u[i]
            fa = av[p] / (n1 * n1)
            for i in range(k):
                for j in range(k):
                    O[p, i, j] = fa * ((1.0 if i == j else 0.0) - w[i] * w[j])
            # Pu H Pu = H - u (uH) - (Hu) u^T + (uHu) u u^T
            uHu = 0.0
            for i in range(n):
                Hu[i] = 0.0
                for j in range(n):
                    Hu[i] += H[p, i, j] * u[j]
                uHu += u[i] * Hu[i]
            fb = 1.0 / (n2 * n2)
            for i in range(n):
                for j in range(n):
                    O[p, k + i, k + j] = fb * (H[p, i, j] - u[i] * Hu[j] - Hu[i] * u[j]
                                               + uHu * u[i] * u[j])
            for i in range(m):
                for j in range(m):
                    O[p, i, j] += cv[p] * nu[i] * nu[j]
    return out


def stencil_sup(V, double h):
    cdef const double[:, :, :, ::1] A = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t N = A.shape[0], d = A.shape[2]
    cdef Py_ssize_t p, i, j, a, b, base
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, x, f0
    with nogil:
        for p in range(N):
            for a in range(d):
                for b in range(d):
                    f0 = A[p, 0, a, b]
                    x = fabs(f0)
                    if x > d0:
                        d0 = x
                    for i in range(d):
                        x = fabs(A[p, 1 + i, a, b] - A[p, 1 + d + i, a, b])
                        if x > d1:
                            d1 = x
                        x = fabs(A[p, 1 + i, a, b] - 2.0 * f0 + A[p, 1 + d + i, a, b])
                        if x > d2:
                            d2 = x
            base = 1 + 2 * d
            for i in range(d):
                for j in range(i + 1, d):
                    for a in range(d):
                        for b in range(d):
                            x = fabs(A[p, base, a, b] - A[p, base + 1, a, b]
                                     - A[p, base + 2, a, b] + A[p, base + 3, a, b]) / 4.0
                            if x > d2:
                                d2 = x
                    base += 4
    return d0, d1 / (2.0 * h), d2 / (h * h)
