"""Pure-Python/numpy versions of the compiled kernels.

Same algorithms and stopping rules as ``_kernels.pyx``; used when the
extension is not built or when ``CVLASSO_BACKEND=python``.
"""
import math

import numpy as np

NAME = "python"


def project_l1_ball(v, k):
    v = np.asarray(v, dtype=np.float64)
    if np.sum(np.abs(v)) <= k:
        return v.copy()
    if k <= 0.0:
        return np.zeros_like(v)
    u = np.sort(np.abs(v), kind="stable")[::-1]
    cs = np.cumsum(u)
    idx = np.arange(1, v.shape[0] + 1)
    ok = u * idx > cs - k
    ok[0] = True
    rho = np.nonzero(ok)[0][-1]
    theta = (cs[rho] - k) / (rho + 1)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def power_iteration(X, iters):
    """Largest eigenvalue of X^T X by power iteration from a fixed start."""
    n, p = X.shape
    if n == 0 or p == 0:
        return 0.0
    v = np.linspace(1.0, 2.0, p)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = X.T @ (X @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            break
        v = w / nrm
    u = X @ v
    return float(u @ u)


def apg_solve(X, b, k, beta0, lip, tol, max_iter):
    """Monotone FISTA with backtracking on 0.5*||b - X beta||^2 over the l1 ball.

    Returns (beta, objective, iterations, converged, lipschitz).
    """
    if lip <= 0.0:
        lip = 1.0

    def half_sq(xb):
        d = xb - b
        return 0.5 * float(d @ d)

    x = project_l1_ball(beta0, k)
    Xx = X @ x
    f_x = half_sq(Xx)
    f0 = 0.5 * float(b @ b)
    floor_ = tol * f0
    x_prev, Xx_prev = x, Xx
    yk, Xy, f_y = x, Xx, f_x
    t = 1.0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        g = X.T @ (Xy - b)
        while True:
            z = project_l1_ball(yk - g / lip, k)
            Xz = X @ z
            f_z = half_sq(Xz)
            d = z - yk
            dq = float(d @ d)
            q = f_y + float(g @ d) + 0.5 * lip * dq
            if f_z - q <= 1e-12 * (f_y + f0) or dq == 0.0:
                break
            lip *= 2.0

        if f_z < f_x:
            f_prev = f_x
            dec = f_x - f_z
            x_prev, Xx_prev = x, Xx
            x, Xx, f_x = z, Xz, f_z
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            c = (t - 1.0) / t_new
            yk = x + c * (x - x_prev)
            Xy = Xx + c * (Xx - Xx_prev)
            f_y = half_sq(Xy)
            t = t_new
            if dec <= tol * max(f_prev, floor_):
                converged = True
                break
        else:
            if t == 1.0:
                converged = True
                break
            t = 1.0
            yk, Xy, f_y = x, Xx, f_x
    return x.copy(), f_x, it, converged, lip
