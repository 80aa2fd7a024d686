"""Monte Carlo harness: synthetic problems, replicated cross-validated fits,
event-restricted error summaries and comparison with the closed-form bounds.
"""
import dataclasses
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .crossval import DEFAULT_DELTA, GENERATOR_ID, cv_lasso
from .solver import SolverConfig

DESIGN_FAMILIES = ("gaussian-iid", "rademacher", "fixed-from-file")


@dataclass(frozen=True)
class Scenario:
    n: int
    p: int
    beta_star: np.ndarray
    sigma: float = 1.0
    delta: float = DEFAULT_DELTA
    replications: int = 100
    master_seed: int = 0
    design_family: str = "gaussian-iid"
    design: np.ndarray | None = None
    design_file: str | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=np.float64)
        object.__setattr__(self, "beta_star", beta)
        if self.design_family not in DESIGN_FAMILIES:
            raise ValueError(f"unknown design family {self.design_family!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be >= 1")
        if beta.shape != (self.p,) or not np.all(np.isfinite(beta)):
            raise ValueError(f"beta_star must be {self.p} finite values")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and >= 0")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.design_family == "fixed-from-file":
            if self.design is None:
                raise ValueError("fixed-from-file needs a design matrix")
            d = np.asarray(self.design, dtype=np.float64)
            if d.shape != (self.n, self.p):
                raise ValueError(f"design file has shape {d.shape}, scenario wants {(self.n, self.p)}")
            object.__setattr__(self, "design", d)

    @property
    def l_star(self):
        return float(np.sum(np.abs(self.beta_star)))

    def to_dict(self):
        return {
            "n": self.n, "p": self.p, "design_family": self.design_family,
            "beta_star": self.beta_star.tolist(), "sigma": self.sigma,
            "delta": self.delta, "replications": self.replications,
            "master_seed": self.master_seed, "design_file": self.design_file,
        }


@dataclass(frozen=True)
class ReplicateRecord:
    index: int
    event: bool
    mspe: float
    sigma2_hat: float
    abs_err: float
    n1: int
    n2: int
    k_hat: float
    m_stat: float
    converged: bool


@dataclass
class SimulationReport:
    scenario: Scenario
    records: list
    aggregates: dict
    bound_report: bounds.BoundReport | None
    dominates_thm1: bool | None
    dominates_thm2: bool | None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "scenario": self.scenario.to_dict(),
            "records": [dataclasses.asdict(r) for r in self.records],
            "aggregates": self.aggregates,
            "bound_report": None if self.bound_report is None else self.bound_report.as_dict(),
            "dominates_thm1": self.dominates_thm1,
            "dominates_thm2": self.dominates_thm2,
            "warnings": list(self.warnings),
        }


def _stream(master_seed, index, purpose):
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index, purpose))


def split_seed(master_seed, index):
    return int(_stream(master_seed, index, 1).generate_state(1, np.uint64)[0])


def generate_problem(scenario, replicate_index):
    """Return ``(x, y, beta_star)`` for one replicate; deterministic in
    ``(master_seed, replicate_index)``."""
    rng = np.random.Generator(np.random.PCG64(_stream(scenario.master_seed, replicate_index, 0)))
    n, p = scenario.n, scenario.p
    if scenario.design_family == "gaussian-iid":
        x = rng.standard_normal((n, p))
    elif scenario.design_family == "rademacher":
        x = 2.0 * rng.integers(0, 2, size=(n, p)).astype(np.float64) - 1.0
    else:
        x = scenario.design.copy()
    eps = rng.standard_normal(n)
    y = x @ scenario.beta_star + scenario.sigma * eps
    return np.ascontiguousarray(x), y, scenario.beta_star.copy()


def mspe_sample(x, beta_star, beta_hat):
    """``||x beta_star - x beta_hat||^2 / n``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        raise ValueError("n must be >= 1")
    d = x @ (np.asarray(beta_star, dtype=np.float64) - np.asarray(beta_hat, dtype=np.float64))
    return float(d @ d) / x.shape[0]


def run_replicate(scenario, index, cfg=SolverConfig()):
    x, y, beta_star = generate_problem(scenario, index)
    est = cv_lasso(x, y, delta=scenario.delta, seed=split_seed(scenario.master_seed, index), cfg=cfg)
    l_star = scenario.l_star
    g = est.grid
    return ReplicateRecord(
        index=index,
        event=bool(g.n1 * g.delta >= l_star and g.n2 * g.delta >= l_star),
        mspe=mspe_sample(x, beta_star, est.beta_cv),
        sigma2_hat=est.sigma2_hat,
        abs_err=abs(est.sigma2_hat - scenario.sigma**2),
        n1=g.n1,
        n2=g.n2,
        k_hat=est.k_hat,
        m_stat=bounds.compute_m(x),
        converged=est.diagnostics["all_converged"],
    )


def _mean_se(v):
    v = np.asarray(v, dtype=np.float64)
    mean = float(np.sum(v) / v.size)
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, se


def aggregate(records):
    """Summaries recomputable from the per-replicate records alone."""
    ev = np.array([r.event for r in records], dtype=np.float64)
    mspe = np.array([r.mspe for r in records])
    err = np.array([r.abs_err for r in records])
    s2 = np.array([r.sigma2_hat for r in records])
    log_n1 = np.log(np.array([r.n1 for r in records], dtype=np.float64) + 1.0)
    log_n2 = np.log(np.array([r.n2 for r in records], dtype=np.float64) + 1.0)
    m = np.array([r.m_stat for r in records])
    out = {"replications": len(records), "event_frequency": float(np.sum(ev) / ev.size)}
    # E(X; A) = E(X 1_A): sum over event replicates, divide by all replicates
    out["mspe_event_mean"], out["mspe_event_se"] = _mean_se(mspe * ev)
    out["abs_err_event_mean"], out["abs_err_event_se"] = _mean_se(err * ev)
    out["mspe_mean"], out["mspe_se"] = _mean_se(mspe)
    out["abs_err_mean"], out["abs_err_se"] = _mean_se(err)
    out["sigma2_mean"], out["sigma2_se"] = _mean_se(s2)
    out["l1_hat"], out["l1_se"] = _mean_se(log_n1)
    out["l2_hat"], out["l2_se"] = _mean_se(log_n2)
    out["m_max"] = float(np.max(m))
    out["m_per_replicate_mean"] = float(np.sum(m) / m.size)
    out["all_converged"] = bool(all(r.converged for r in records))
    return out


def run_monte_carlo(scenario, cfg=SolverConfig(), workers=1, order=None):
    """Replicate the cross-validated fit and compare with the bounds.

    ``order`` permutes execution order only; records and aggregates are
    always folded in replicate-index order.
    """
    indices = list(range(scenario.replications)) if order is None else list(order)
    if sorted(indices) != list(range(scenario.replications)):
        raise ValueError("order must be a permutation of the replicate indices")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(lambda i: run_replicate(scenario, i, cfg), indices))
    else:
        recs = [run_replicate(scenario, i, cfg) for i in indices]
    records = sorted(recs, key=lambda r: r.index)
    agg = aggregate(records)

    notes = []
    if agg["event_frequency"] == 0.0:
        msg = "the event N1*delta >= |beta*|_1, N2*delta >= |beta*|_1 never occurred"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    if not agg["all_converged"]:
        notes.append("some solves hit max_iter")

    report, d1, d2 = None, None, None
    if scenario.sigma > 0:
        m_stat = (bounds.compute_m(scenario.design)
                  if scenario.design_family == "fixed-from-file" else agg["m_max"])
        b = bounds.BoundInputs(n=scenario.n, p=scenario.p, sigma=scenario.sigma,
                               l_star=scenario.l_star, delta=scenario.delta,
                               m_stat=m_stat, l1=agg["l1_hat"], l2=agg["l2_hat"])
        report = bounds.bound_report(b)
        d1 = bool(agg["mspe_event_mean"] + 2 * agg["mspe_event_se"] <= report.r)
        d2 = bool(agg["abs_err_event_mean"] + 2 * agg["abs_err_event_se"] <= report.sigma_bound)
    else:
        notes.append("sigma = 0: bounds need sigma > 0 and are not evaluated")
    return SimulationReport(scenario=scenario, records=records, aggregates=agg,
                            bound_report=report, dominates_thm1=d1, dominates_thm2=d2,
                            warnings=notes)


def consistency_sweep(base_scenario, n_values, cfg=SolverConfig(), workers=1):
    """One report per sample size, everything else taken from ``base_scenario``."""
    n_values = list(n_values)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly ascending")
    if base_scenario.design_family == "fixed-from-file" and any(n != base_scenario.n for n in n_values):
        raise ValueError("a fixed design cannot be swept over n")
    return [run_monte_carlo(dataclasses.replace(base_scenario, n=n), cfg, workers)
            for n in n_values]


def baseline_scenario(replications=200, master_seed=20160125, design_family="gaussian-iid"):
    """n=200, p=50, five active coefficients of 0.4 (|beta*|_1 = 2), sigma=1, delta=0.05."""
    beta = np.zeros(50)
    beta[:5] = 0.4
    return Scenario(n=200, p=50, beta_star=beta, sigma=1.0, delta=0.05,
                    replications=replications, master_seed=master_seed,
                    design_family=design_family)


__all__ = [
    "GENERATOR_ID", "Scenario", "ReplicateRecord", "SimulationReport", "generate_problem",
    "mspe_sample", "run_replicate", "aggregate", "run_monte_carlo", "consistency_sweep",
    "baseline_scenario", "split_seed",
]
