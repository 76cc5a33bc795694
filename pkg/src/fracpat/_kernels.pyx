# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``fracpat._fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, floor, fabs, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()


def cell_sum(const double[::1] w, double step, const double[::1] xi):
    """Return ``sum_j w[j] * exp(-2 pi i j step xi)`` for every ``xi`` (Horner)."""
    cdef Py_ssize_t n = w.shape[0], m = xi.shape[0], k, j
    cdef double frac, zr, zi, sr, si, tr
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    for k in range(m):
        frac = step * xi[k]
        frac = frac - floor(frac)
        zr = cos(2.0 * M_PI * frac)
        zi = -sin(2.0 * M_PI * frac)
        sr = 0.0
        si = 0.0
        for j in range(n - 1, -1, -1):
            tr = sr * zr - si * zi + w[j]
            si = sr * zi + si * zr
            sr = tr
        o[k] = sr + 1j * si
    return out


cdef inline double _spline(const double[:, ::1] v, const double[:, ::1] mm, Py_ssize_t a,
                           double x0, double h, double y) noexcept nogil:
    cdef Py_ssize_t n = v.shape[1], i
    cdef double u = (y - x0) / h, tau, A, B
    if u < 0.0 or u > n - 1:
        return 0.0
    i = <Py_ssize_t>floor(u)
    if i >= n - 1:
        i = n - 2
    tau = u - i
    A = 1.0 - tau
    B = tau
    return (A * v[a, i] + B * v[a, i + 1]
            + ((A * A * A - A) * mm[a, i] + (B * B * B - B) * mm[a, i + 1]) * h * h / 6.0)


def trilinear_sums(const double[:, ::1] fv, const double[:, ::1] fm, double fx0, double fh,
                   const double[:, ::1] gv, const double[:, ::1] gm, double gx0, double gh,
                   const double[::1] xs, const double[::1] wx,
                   const double[::1] ts, const double[::1] wt,
                   double p, double q):
    """Matrix ``S[a, b] = sum_x wx sum_t wt f_a(x + t) g_b(x + p t^2 + q t)``.

    ``f_a`` and ``g_b`` are natural cubic splines given by node values and
    second derivatives on uniform grids; they vanish outside their grids.
    """
    cdef Py_ssize_t K = fv.shape[0], L = gv.shape[0]
    cdef Py_ssize_t ix, it, a, b
    cdef Py_ssize_t nx = xs.shape[0], nt = ts.shape[0]
    cdef double x, t, w, y1, y2, fa
    out = np.zeros((K, L), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double *fvals = <double *>malloc(K * sizeof(double))
    cdef double *gvals = <double *>malloc(L * sizeof(double))
    cdef double *acc = <double *>malloc(K * L * sizeof(double))
    cdef double *row = <double *>malloc(K * L * sizeof(double))
    cdef bint fzero, gzero
    try:
        for a in range(K * L):
            acc[a] = 0.0
        for ix in range(nx):
            x = xs[ix]
            for a in range(K * L):
                row[a] = 0.0
            for it in range(nt):
                t = ts[it]
                y1 = x + t
                y2 = x + p * t * t + q * t
                fzero = True
                for a in range(K):
                    fvals[a] = _spline(fv, fm, a, fx0, fh, y1)
                    if fvals[a] != 0.0:
                        fzero = False
                if fzero:
                    continue
                gzero = True
                for b in range(L):
                    gvals[b] = _spline(gv, gm, b, gx0, gh, y2)
                    if gvals[b] != 0.0:
                        gzero = False
                if gzero:
                    continue
                w = wt[it]
                for a in range(K):
                    fa = w * fvals[a]
                    for b in range(L):
                        row[a * L + b] += fa * gvals[b]
            w = wx[ix]
            for a in range(K * L):
                acc[a] += w * row[a]
        for a in range(K):
            for b in range(L):
                o[a, b] = acc[a * L + b]
    finally:
        free(fvals)
        free(gvals)
        free(acc)
        free(row)
    return out


cdef inline bint _member(const unsigned char[::1] mask, double z, double cell, double tol) noexcept nogil:
    cdef Py_ssize_t n = mask.shape[0], c
    cdef double u = z / cell, r
    if u < -tol or u > n + tol:
        return False
    r = floor(u + 0.5)
    if fabs(u - r) <= tol:
        c = <Py_ssize_t>r
        if c - 1 >= 0 and c - 1 < n and mask[c - 1]:
            return True
        if c >= 0 and c < n and mask[c]:
            return True
        return False
    c = <Py_ssize_t>floor(u)
    return 0 <= c < n and mask[c] != 0


def pattern_scan(const unsigned char[::1] mask, const long long[::1] kept,
                 long long kmin, long long kmax, double p, double q, double cell,
                 bint require_distinct, double tol):
    """First ``(i, k)`` in scan order with centre ``x_i``, ``t = k * cell`` forming a pattern.

    Returns ``(-1, -1)`` when the grid holds no witness.
    """
    cdef Py_ssize_t n = mask.shape[0], ii
    cdef long long i, k, j
    cdef double x, t, pt
    for ii in range(kept.shape[0]):
        i = kept[ii]
        x = (i + 0.5) * cell
        for k in range(kmin, kmax + 1):
            j = i + k
            if j >= n:
                break
            if not mask[j]:
                continue
            t = k * cell
            pt = p * t * t + q * t
            if require_distinct and (fabs(pt - t) <= tol * cell or fabs(pt) <= tol * cell):
                continue
            if _member(mask, x + pt, cell, tol):
                return (i, k)
    return (-1, -1)
