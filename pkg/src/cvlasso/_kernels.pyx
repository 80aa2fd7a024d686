# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: l1-ball projection, power iteration and the monotone
accelerated projected-gradient loop.

Matrix-vector products are plain loops (no BLAS) so results do not depend on
the number of BLAS threads. Every kernel releases the GIL.
"""
import numpy as np

from libc.math cimport fabs, sqrt
from libc.stdlib cimport qsort
from libc.string cimport memcpy

NAME = "native"


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    if x > y:
        return -1
    if x < y:
        return 1
    return 0


cdef void _project(const double* v, Py_ssize_t p, double k,
                   double* out, double* work) noexcept nogil:
    cdef Py_ssize_t i, rho = 0
    cdef double l1 = 0.0, cs = 0.0, cs_rho = 0.0, theta, a
    for i in range(p):
        l1 += fabs(v[i])
    if l1 <= k:
        memcpy(out, v, p * sizeof(double))
        return
    if k <= 0.0:
        for i in range(p):
            out[i] = 0.0
        return
    for i in range(p):
        work[i] = fabs(v[i])
    qsort(work, p, sizeof(double), _cmp_desc)
    # index 0 always qualifies when k > 0; force it against rounding
    for i in range(p):
        cs += work[i]
        if i == 0 or work[i] * (i + 1) > cs - k:
            rho = i
            cs_rho = cs
    theta = (cs_rho - k) / (rho + 1)
    for i in range(p):
        a = fabs(v[i]) - theta
        if a > 0.0:
            out[i] = a if v[i] > 0.0 else -a
        else:
            out[i] = 0.0


cdef inline void _matvec(const double[:, ::1] X, const double* v,
                         double* out) noexcept nogil:
    cdef Py_ssize_t i, j, n = X.shape[0], p = X.shape[1]
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(p):
            s += X[i, j] * v[j]
        out[i] = s


cdef inline void _rmatvec(const double[:, ::1] X, const double* r,
                          double* out) noexcept nogil:
    cdef Py_ssize_t i, j, n = X.shape[0], p = X.shape[1]
    cdef double ri
    for j in range(p):
        out[j] = 0.0
    for i in range(n):
        ri = r[i]
        for j in range(p):
            out[j] += X[i, j] * ri


cdef inline double _half_sq_resid(const double* xb, const double* b,
                                  Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, d
    for i in range(n):
        d = xb[i] - b[i]
        s += d * d
    return 0.5 * s


def project_l1_ball(const double[::1] v, double k):
    cdef Py_ssize_t p = v.shape[0]
    out = np.empty(p, dtype=np.float64)
    work = np.empty(p, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] w = work
    if p == 0:
        return out
    with nogil:
        _project(&v[0], p, k, &o[0], &w[0])
    return out


def power_iteration(const double[:, ::1] X, int iters):
    """Largest eigenvalue of X^T X by power iteration from a fixed start."""
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], j
    cdef int it
    cdef double nrm, est = 0.0
    if n == 0 or p == 0:
        return 0.0
    v_arr = np.linspace(1.0, 2.0, p)
    u_arr = np.empty(n)
    w_arr = np.empty(p)
    cdef double[::1] v = v_arr
    cdef double[::1] u = u_arr
    cdef double[::1] w = w_arr
    with nogil:
        nrm = 0.0
        for j in range(p):
            nrm += v[j] * v[j]
        nrm = sqrt(nrm)
        for j in range(p):
            v[j] /= nrm
        for it in range(iters):
            _matvec(X, &v[0], &u[0])
            _rmatvec(X, &u[0], &w[0])
            nrm = 0.0
            for j in range(p):
                nrm += w[j] * w[j]
            nrm = sqrt(nrm)
            if nrm == 0.0:
                break
            for j in range(p):
                v[j] = w[j] / nrm
        _matvec(X, &v[0], &u[0])
        est = 0.0
        for j in range(n):
            est += u[j] * u[j]
    return est


def apg_solve(const double[:, ::1] X, const double[::1] b, double k,
              const double[::1] beta0, double lip, double tol, int max_iter):
    """Monotone FISTA with backtracking on 0.5*||b - X beta||^2 over the l1 ball.

    Returns (beta, objective, iterations, converged, lipschitz).
    """
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], i, j
    cdef int it = 0, converged = 0
    cdef double f0, floor_, f_x, f_y, f_z, q, dq, gd, t = 1.0, t_new, c, dec, f_prev

    buf = np.zeros(7 * p + 4 * n, dtype=np.float64)
    cdef double[::1] B = buf
    cdef double* x = &B[0]
    cdef double* x_prev = &B[p]
    cdef double* yk = &B[2 * p]
    cdef double* g = &B[3 * p]
    cdef double* z = &B[4 * p]
    cdef double* work = &B[5 * p]
    cdef double* step = &B[6 * p]
    cdef double* Xx = &B[7 * p]
    cdef double* Xx_prev = &B[7 * p + n]
    cdef double* Xy = &B[7 * p + 2 * n]
    cdef double* Xz = &B[7 * p + 3 * n]
    # scratch residual lives in Xz before Xz is needed
    cdef double* r = Xz

    if lip <= 0.0:
        lip = 1.0

    with nogil:
        _project(&beta0[0], p, k, x, work)
        _matvec(X, x, Xx)
        f_x = _half_sq_resid(Xx, &b[0], n)
        f0 = 0.0
        for i in range(n):
            f0 += b[i] * b[i]
        f0 *= 0.5
        floor_ = tol * f0
        memcpy(x_prev, x, p * sizeof(double))
        memcpy(Xx_prev, Xx, n * sizeof(double))
        memcpy(yk, x, p * sizeof(double))
        memcpy(Xy, Xx, n * sizeof(double))
        f_y = f_x

        while it < max_iter:
            it += 1
            for i in range(n):
                r[i] = Xy[i] - b[i]
            _rmatvec(X, r, g)
            while True:
                for j in range(p):
                    step[j] = yk[j] - g[j] / lip
                _project(step, p, k, z, work)
                _matvec(X, z, Xz)
                f_z = _half_sq_resid(Xz, &b[0], n)
                gd = 0.0
                dq = 0.0
                for j in range(p):
                    c = z[j] - yk[j]
                    gd += g[j] * c
                    dq += c * c
                q = f_y + gd + 0.5 * lip * dq
                if f_z - q <= 1e-12 * (f_y + f0) or dq == 0.0:
                    break
                lip *= 2.0

            if f_z < f_x:
                f_prev = f_x
                dec = f_x - f_z
                memcpy(x_prev, x, p * sizeof(double))
                memcpy(Xx_prev, Xx, n * sizeof(double))
                memcpy(x, z, p * sizeof(double))
                memcpy(Xx, Xz, n * sizeof(double))
                f_x = f_z
                t_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
                c = (t - 1.0) / t_new
                for j in range(p):
                    yk[j] = x[j] + c * (x[j] - x_prev[j])
                for i in range(n):
                    Xy[i] = Xx[i] + c * (Xx[i] - Xx_prev[i])
                f_y = _half_sq_resid(Xy, &b[0], n)
                t = t_new
                if dec <= tol * (f_prev if f_prev > floor_ else floor_):
                    converged = 1
                    break
            else:
                if t == 1.0:
                    # plain projected-gradient step from x made no progress
                    converged = 1
                    break
                t = 1.0
                memcpy(yk, x, p * sizeof(double))
                memcpy(Xy, Xx, n * sizeof(double))
                f_y = f_x

    beta = np.empty(p, dtype=np.float64)
    cdef double[::1] bo = beta
    for j in range(p):
        bo[j] = x[j]
    return beta, f_x, it, bool(converged), lip
