# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch chord solver.

Mirrors ``_kernels_py.solve_forward`` lane by lane; see that module for the
algorithm description.  Status codes: 0 ok, 1 start point not interior,
2 bracket failure / iteration cap.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, exp, log, copysign

cnp.import_array()

DEF ELLIPSOID = 0
DEF PNORM = 1
DEF LOGSUMEXP = 2


cdef inline void _eval_quad(double a, double b, double c, double u,
                            double *f, double *df) noexcept nogil:
    f[0] = (a * u + 2.0 * b) * u + c
    df[0] = 2.0 * (a * u + b)


cdef inline void _eval_pnorm(const double[::1] y0, const double[::1] v,
                             double r, double p, double u,
                             double *f, double *df) noexcept nogil:
    cdef Py_ssize_t i, n = y0.shape[0]
    cdef double z, az, s = 0.0, ds = 0.0
    for i in range(n):
        z = (y0[i] + u * v[i]) / r
        az = fabs(z)
        s += pow(az, p)
        ds += p * copysign(pow(az, p - 1.0), z) * v[i] / r
    f[0] = s - 1.0
    df[0] = ds


cdef inline void _eval_lse(const double[::1] ax, const double[::1] av,
                           double beta, double u,
                           double *f, double *df) noexcept nogil:
    cdef Py_ssize_t k, m = ax.shape[0]
    cdef double smax, s, w, tot = 0.0, dtot = 0.0
    smax = beta * (ax[0] + u * av[0])
    for k in range(1, m):
        s = beta * (ax[k] + u * av[k])
        if s > smax:
            smax = s
    for k in range(m):
        w = exp(beta * (ax[k] + u * av[k]) - smax)
        tot += w
        dtot += w * av[k]
    f[0] = (smax + log(tot)) / beta
    df[0] = dtot / tot


def solve_forward(int family,
                  const double[:, ::1] X,
                  const double[:, ::1] V,
                  const double[::1] umax,
                  const double[::1] center,
                  const double[:, ::1] mat,
                  const double[::1] offsets,
                  double s1, double s2,
                  int max_iter=200):
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], nf = mat.shape[0]
    cdef Py_ssize_t lane, i, j, k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_out = np.empty(m)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] status = np.zeros(m, dtype=np.int8)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] iters = np.zeros(m, dtype=np.int32)
    cdef double[::1] y0 = np.empty(n)
    cdef double[::1] vv = np.empty(n)
    cdef double[::1] ax = np.empty(max(nf, 1))
    cdef double[::1] av = np.empty(max(nf, 1))
    cdef double qa = 0.0, qb = 0.0, qc = 0.0, acc, acc2
    cdef double lo, hi, u, f, df, f0, fhi, du, unew, tol
    cdef int it

    for lane in range(m):
        for i in range(n):
            y0[i] = X[lane, i] - center[i]
            vv[i] = V[lane, i]
        if family == ELLIPSOID:
            qa = 0.0; qb = 0.0; qc = 0.0
            for i in range(n):
                acc = 0.0
                acc2 = 0.0
                for j in range(n):
                    acc += mat[i, j] * vv[j]
                    acc2 += mat[i, j] * y0[j]
                qa += vv[i] * acc
                qb += y0[i] * acc
                qc += y0[i] * acc2
            qc -= 1.0
        elif family == LOGSUMEXP:
            for k in range(nf):
                acc = -offsets[k]
                acc2 = 0.0
                for i in range(n):
                    acc += mat[k, i] * X[lane, i]
                    acc2 += mat[k, i] * vv[i]
                ax[k] = acc
                av[k] = acc2

        lo = 0.0
        hi = umax[lane]
        if family == ELLIPSOID:
            _eval_quad(qa, qb, qc, lo, &f0, &df)
            _eval_quad(qa, qb, qc, hi, &fhi, &df)
        elif family == PNORM:
            _eval_pnorm(y0, vv, s1, s2, lo, &f0, &df)
            _eval_pnorm(y0, vv, s1, s2, hi, &fhi, &df)
        else:
            _eval_lse(ax, av, s1, lo, &f0, &df)
            _eval_lse(ax, av, s1, hi, &fhi, &df)
        if not (f0 < 0.0):
            status[lane] = 1
            t_out[lane] = np.nan
            continue
        if not (fhi > 0.0):
            status[lane] = 2
            t_out[lane] = np.nan
            continue

        u = hi
        f = fhi
        if family == ELLIPSOID:
            _eval_quad(qa, qb, qc, u, &f, &df)
        elif family == PNORM:
            _eval_pnorm(y0, vv, s1, s2, u, &f, &df)
        else:
            _eval_lse(ax, av, s1, u, &f, &df)
        it = 0
        while it < max_iter:
            it += 1
            if f == 0.0:
                break
            if f < 0.0:
                lo = u
            else:
                hi = u
            if df > 0.0:
                unew = u - f / df
            else:
                unew = lo - 1.0
            if not (unew > lo and unew < hi):
                unew = 0.5 * (lo + hi)
            du = unew - u
            u = unew
            if family == ELLIPSOID:
                _eval_quad(qa, qb, qc, u, &f, &df)
            elif family == PNORM:
                _eval_pnorm(y0, vv, s1, s2, u, &f, &df)
            else:
                _eval_lse(ax, av, s1, u, &f, &df)
            if fabs(du) <= 1e-15 * fabs(u) or hi - lo <= 1e-15 * hi:
                break
        tol = 1e-12 * (1.0 + fabs(df))
        iters[lane] = it
        if fabs(f) > tol:
            status[lane] = 2
        t_out[lane] = u
    return t_out, status, iters
