"""Primal (l1-constrained) Lasso: projection, single solves and warm-started paths."""
from dataclasses import dataclass

import numpy as np

from . import _backend


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 50_000
    lipschitz_power_iters: int = 100
    backend: str = "auto"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.lipschitz_power_iters < 1:
            raise ValueError("lipschitz_power_iters must be >= 1")

    @property
    def kernels(self):
        return _backend.get(self.backend)


@dataclass(frozen=True)
class ConstrainedFit:
    k: float
    beta: np.ndarray
    residual_ss: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class LassoPath:
    grid: np.ndarray
    fits: tuple

    def __len__(self):
        return len(self.fits)

    def __getitem__(self, i):
        return self.fits[i]

    @property
    def betas(self):
        return np.array([f.beta for f in self.fits])

    @property
    def residual_ss(self):
        return np.array([f.residual_ss for f in self.fits])


def _as_design(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"design must be 2-D, got shape {x.shape}")
    if x.shape[1] < 1:
        raise ValueError("design must have at least one column")
    if not np.all(np.isfinite(x)):
        raise ValueError("design contains non-finite entries")
    return x


def _as_response(y, n):
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError(f"response must be 1-D, got shape {y.shape}")
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} does not match design rows {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite entries")
    return y


def _check_budget(k):
    k = float(k)
    if not np.isfinite(k) or k < 0:
        raise ValueError(f"l1 budget must be finite and >= 0, got {k}")
    return k


def project_l1_ball(v, k, backend="auto"):
    """Euclidean projection of ``v`` onto ``{b : |b|_1 <= k}``.

    Vectors already inside the ball are returned unchanged.
    """
    k = _check_budget(k)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("v must be 1-D")
    if not np.all(np.isfinite(v)):
        raise ValueError("v contains non-finite entries")
    return _backend.get(backend).project_l1_ball(v, k)


def lipschitz_estimate(x, cfg=SolverConfig()):
    """Largest squared singular value of ``x`` (power iteration)."""
    x = _as_design(x)
    return float(cfg.kernels.power_iteration(x, cfg.lipschitz_power_iters))


def objective(x, y, beta):
    r = np.asarray(y) - np.asarray(x) @ np.asarray(beta)
    return float(r @ r)


def _zero_fit(k, p, y):
    return ConstrainedFit(k=k, beta=np.zeros(p), residual_ss=float(y @ y),
                          iterations=0, converged=True)


def _solve(kern, x, y, k, beta0, lip, cfg):
    beta, half_rss, iters, conv, lip = kern.apg_solve(
        x, y, k, beta0, lip, cfg.tol, cfg.max_iter)
    return ConstrainedFit(k=k, beta=beta, residual_ss=2.0 * half_rss,
                          iterations=int(iters), converged=bool(conv)), lip


def solve_constrained_lasso(x, y, k, cfg=SolverConfig()):
    """Minimize ``||y - x b||^2`` subject to ``|b|_1 <= k``.

    Accelerated projected gradient started from ``b = 0``; the iterate sequence
    is deterministic, so among several minimizers the same one is always
    returned. Non-convergence is reported through ``converged``.
    """
    x = _as_design(x)
    y = _as_response(y, x.shape[0])
    k = _check_budget(k)
    n, p = x.shape
    if n == 0 or k == 0.0:
        return _zero_fit(k, p, y)
    kern = cfg.kernels
    lip = kern.power_iteration(x, cfg.lipschitz_power_iters)
    fit, _ = _solve(kern, x, y, k, np.zeros(p), lip, cfg)
    return fit


def fit_path(x, y, grid, cfg=SolverConfig()):
    """Constrained fits along an ascending budget grid, each warm-started
    from the previous grid point. An empty row set yields all-zero fits."""
    x = _as_design(x)
    y = _as_response(y, x.shape[0])
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if grid[0] < 0 or not np.all(np.isfinite(grid)):
        raise ValueError("grid values must be finite and >= 0")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    n, p = x.shape
    if n == 0:
        return LassoPath(grid=grid, fits=tuple(_zero_fit(float(k), p, y) for k in grid))

    kern = cfg.kernels
    lip = None
    beta = np.zeros(p)
    fits = []
    for k in grid:
        k = float(k)
        if k == 0.0:
            fit = _zero_fit(k, p, y)
        else:
            if lip is None:
                lip = kern.power_iteration(x, cfg.lipschitz_power_iters)
            fit, lip = _solve(kern, x, y, k, beta, lip, cfg)
        beta = fit.beta
        fits.append(fit)
    return LassoPath(grid=grid, fits=tuple(fits))
