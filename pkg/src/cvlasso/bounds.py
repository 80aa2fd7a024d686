"""Closed-form risk bounds for the cross-validated Lasso and the
concentration facts they rest on.

Natural logarithms throughout.
"""
import math
from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class BoundInputs:
    n: int
    p: int
    sigma: float
    l_star: float  # |beta*|_1
    delta: float
    m_stat: float
    l1: float  # E log(N1 + 1)
    l2: float  # E log(N2 + 1)

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be >= 1")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for name in ("l_star", "delta", "m_stat", "l1", "l2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @property
    def big_l(self):
        return self.l_star + self.delta


@dataclass(frozen=True)
class BoundReport:
    big_l: float
    c1: float
    c2: float
    e_n: float
    r: float
    sigma_bound: float

    def as_dict(self):
        return asdict(self)


def compute_m(x):
    """Largest column mean of fourth powers of the design."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("M needs a 2-D design with at least one row")
    return float(np.max(np.mean(x**4, axis=0)))


def _e_n(n, sigma, big_l, m):
    s2 = sigma * sigma
    inner = (n + 5) * s2 * s2 / n + (n + 1) * s2 / n * big_l**2 * math.sqrt(m)
    log_val = (math.log(16.0) + 0.5 * math.log(inner)
               + 0.5 * n * math.log((1.0 + 2.0**-0.5) / 2.0))
    return math.exp(log_val)


def theorem1_constants(b):
    """Return ``(C1, C2, E_n)`` for the prediction-error bound, with L = |beta*|_1 + delta."""
    big_l = b.big_l
    s2 = b.sigma * b.sigma
    sqrt_m = math.sqrt(b.m_stat)
    c1 = 16.0 * math.sqrt(4.0 * s2 * s2 + 2.0 * big_l**2 * sqrt_m * s2)
    c2 = 96.0 * big_l**2 * sqrt_m + 57.0 * big_l * b.m_stat**0.25 * b.sigma
    return c1, c2, _e_n(b.n, b.sigma, big_l, b.m_stat)


def theorem1_rhs(b):
    """Upper bound on the event-restricted mean squared prediction error."""
    c1, c2, e_n = theorem1_constants(b)
    return (c1 * (math.sqrt(b.l1) + math.sqrt(b.l2)) / math.sqrt(b.n)
            + c2 * math.sqrt(math.log(2 * b.p) / b.n) + e_n)


def theorem2_bound(r, sigma, n):
    """Bound on E(|sigma2_hat - sigma^2|; event) given the prediction bound ``r``."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return sigma * sigma * math.sqrt(2.0 / n) + 2.0 * sigma * math.sqrt(r) + r


def bound_report(b):
    c1, c2, e_n = theorem1_constants(b)
    r = (c1 * (math.sqrt(b.l1) + math.sqrt(b.l2)) / math.sqrt(b.n)
         + c2 * math.sqrt(math.log(2 * b.p) / b.n) + e_n)
    return BoundReport(big_l=b.big_l, c1=c1, c2=c2, e_n=e_n, r=r,
                       sigma_bound=theorem2_bound(r, b.sigma, b.n))


def gaussian_square_mgf(mu, sigma, a):
    """E exp(Z^2 / (2 a sigma^2)) for Z ~ N(mu, sigma^2); finite only for a > 1."""
    if not a > 1:
        raise ValueError(f"a must exceed 1 (the integral diverges otherwise), got {a}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return math.exp(mu * mu / (2.0 * (a - 1.0) * sigma * sigma)) * math.sqrt(a / (a - 1.0))


def subgaussian_max_bound(m, sigma):
    """Bounds on E max xi_i and E max |xi_i| for m sigma-sub-Gaussian variables."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return sigma * math.sqrt(2.0 * math.log(m)), sigma * math.sqrt(2.0 * math.log(2 * m))


def hoeffding_mgf_bound(gammas, theta):
    """exp(theta^2 sum gamma_i^2 / 2), the MGF bound for independent centred |xi_i| <= gamma_i."""
    g = np.asarray(gammas, dtype=np.float64)
    if np.any(g < 0):
        raise ValueError("gammas must be nonnegative")
    return math.exp(theta * theta * float(g @ g) / 2.0)
