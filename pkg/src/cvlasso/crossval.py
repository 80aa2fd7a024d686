"""Two-half cross-validated primal Lasso and the residual variance estimate.

The pipeline: coin-flip split into I / I^c, a Lasso path on each half,
holdout selection of one budget per half, recombination of the cross
predictions into ``mu_prime``, and a final budget chosen by how closely the
full-data fit reproduces ``mu_prime``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .solver import SolverConfig, _as_design, _as_response, fit_path

GENERATOR_ID = "numpy.PCG64"
DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class SplitAssignment:
    membership: np.ndarray  # True -> index in I
    seed: int | None = None
    generator: str = GENERATOR_ID

    @property
    def n(self):
        return self.membership.shape[0]

    @property
    def in_i(self):
        return np.flatnonzero(self.membership)

    @property
    def in_ic(self):
        return np.flatnonzero(~self.membership)


@dataclass(frozen=True)
class GridSpec:
    delta: float
    n1: int
    n2: int

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("n1 and n2 must be nonnegative")

    @property
    def grid1(self):
        return self.delta * np.arange(self.n1 + 1)

    @property
    def grid2(self):
        return self.delta * np.arange(self.n2 + 1)

    @property
    def grid_full(self):
        return self.delta * np.arange(max(self.n1, self.n2) + 1)


@dataclass(frozen=True)
class CvEstimate:
    k_hat_1: float
    k_hat_2: float
    mu_prime: np.ndarray
    k_hat: float
    beta_cv: np.ndarray
    sigma2_hat: float
    grid: GridSpec
    split: SplitAssignment
    seed: int | None
    generator: str = GENERATOR_ID
    diagnostics: dict = field(default_factory=dict)


def random_split(n, rng):
    """Put each of ``n`` indices in I independently with probability 1/2.

    ``rng`` is an integer seed or a ``numpy.random.Generator``.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = np.random.Generator(np.random.PCG64(seed))
    membership = rng.random(n) < 0.5
    return SplitAssignment(membership=membership, seed=seed)


def _ceil_count(ratio):
    # guard against ratios like 3/0.1 = 30.000000000000004
    n = math.ceil(ratio)
    if n >= 1 and math.isclose(ratio, n - 1, rel_tol=1e-12, abs_tol=0.0):
        n -= 1
    return int(n)


def ridge_l1(x, y):
    """l1 norm of the unit-penalty ridge fit ``(x'x + I)^{-1} x'y``."""
    n, p = x.shape
    if n == 0:
        return 0.0
    if p <= n:
        beta = np.linalg.solve(x.T @ x + np.eye(p), x.T @ y)
    else:
        beta = x.T @ np.linalg.solve(x @ x.T + np.eye(n), y)
    return float(np.sum(np.abs(beta)))


def half_count(x, y, delta):
    """Grid length for one half: ceil(2 |ridge|_1 / delta), 0 on an empty half."""
    if x.shape[0] == 0:
        return 0
    return _ceil_count(2.0 * ridge_l1(x, y) / delta)


def default_grid(x, y, split, delta=DEFAULT_DELTA):
    """Grid sizes from the ridge rule. N1 sees only I^c rows, N2 only I rows."""
    delta = float(delta)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    x = _as_design(x)
    y = _as_response(y, x.shape[0])
    ic, i = split.in_ic, split.in_i
    return GridSpec(delta=delta,
                    n1=half_count(x[ic], y[ic], delta),
                    n2=half_count(x[i], y[i], delta))


def holdout_sse(path, holdout_x, holdout_y):
    holdout_x = np.asarray(holdout_x, dtype=np.float64)
    holdout_y = np.asarray(holdout_y, dtype=np.float64)
    out = np.empty(len(path))
    for j, fit in enumerate(path.fits):
        r = holdout_y - holdout_x @ fit.beta
        out[j] = r @ r
    return out


def select_k(path, holdout_x, holdout_y):
    """Grid budget with the smallest holdout SSE; ties go to the smallest budget."""
    if len(path) == 0:
        raise ValueError("path is empty")
    sse = holdout_sse(path, holdout_x, holdout_y)
    # np.argmin returns the first minimum and the grid is ascending
    return float(path.grid[int(np.argmin(sse))])


def combine_mu(split, fit_on_i2, fit_on_i1, x):
    """Cross predictions: rows in I use the I^c-half fit, rows in I^c the I-half fit."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != split.n:
        raise ValueError("split length does not match design rows")
    m = split.membership
    mu = np.empty(split.n)
    mu[m] = x[m] @ fit_on_i2.beta
    mu[~m] = x[~m] @ fit_on_i1.beta
    return mu


def select_khat(x, y, mu_prime, grid_full, cfg=SolverConfig()):
    """Return ``(k_hat, beta_cv, path)`` minimizing ``||mu_prime - x beta^(K)||``
    over the full-data path; ties go to the smallest budget."""
    grid_full = np.asarray(grid_full, dtype=np.float64)
    if grid_full.size == 0:
        raise ValueError("grid_full is empty")
    path = fit_path(x, y, grid_full, cfg)
    x = np.asarray(x, dtype=np.float64)
    crit = np.array([np.linalg.norm(mu_prime - x @ f.beta) for f in path.fits])
    j = int(np.argmin(crit))
    return float(path.grid[j]), path.fits[j].beta.copy(), path


def estimate_sigma2(y, x, beta_cv):
    """Residual variance ``||y - x beta_cv||^2 / n``."""
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n == 0:
        raise ValueError("sigma^2 estimate is undefined for n = 0")
    r = y - np.asarray(x, dtype=np.float64) @ np.asarray(beta_cv, dtype=np.float64)
    return float(r @ r) / n


def cv_lasso(x, y, delta=DEFAULT_DELTA, grid_override=None, seed=0, cfg=SolverConfig()):
    """Run the full two-half cross-validation and return a :class:`CvEstimate`.

    ``grid_override`` is an optional ``(n1, n2)`` pair replacing the ridge
    rule; either entry may be None to keep the rule for that half. For
    ``n = 0`` the estimate is zero and ``sigma2_hat`` is NaN.
    """
    x = _as_design(x)
    y = _as_response(y, x.shape[0])
    n, p = x.shape
    split = random_split(n, seed)
    grid = default_grid(x, y, split, delta)
    if grid_override is not None:
        n1, n2 = grid_override
        grid = GridSpec(delta=grid.delta,
                        n1=grid.n1 if n1 is None else int(n1),
                        n2=grid.n2 if n2 is None else int(n2))

    i, ic = split.in_i, split.in_ic
    # beta^(K,1) on I over grid2, beta^(K,2) on I^c over grid1
    path1 = fit_path(x[i], y[i], grid.grid2, cfg)
    path2 = fit_path(x[ic], y[ic], grid.grid1, cfg)
    k_hat_1 = select_k(path2, x[i], y[i])
    k_hat_2 = select_k(path1, x[ic], y[ic])
    fit2 = path2.fits[int(round(k_hat_1 / grid.delta))]
    fit1 = path1.fits[int(round(k_hat_2 / grid.delta))]
    mu_prime = combine_mu(split, fit2, fit1, x)

    k_hat, beta_cv, full_path = select_khat(x, y, mu_prime, grid.grid_full, cfg)
    sigma2 = estimate_sigma2(y, x, beta_cv) if n > 0 else float("nan")

    paths = (path1, path2, full_path)
    diagnostics = {
        "iterations": int(sum(f.iterations for pth in paths for f in pth.fits)),
        "all_converged": bool(all(f.converged for pth in paths for f in pth.fits)),
        "nonconverged": int(sum(not f.converged for pth in paths for f in pth.fits)),
        "size_i": int(i.size),
        "size_ic": int(ic.size),
        "backend": cfg.kernels.NAME,
    }
    return CvEstimate(k_hat_1=k_hat_1, k_hat_2=k_hat_2, mu_prime=mu_prime,
                      k_hat=k_hat, beta_cv=beta_cv, sigma2_hat=sigma2, grid=grid,
                      split=split, seed=split.seed, diagnostics=diagnostics)
