"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times a warm-started path, a single cross-validated fit and a small Monte
Carlo run under each available backend, and checks that they agree.
"""
import argparse
import time

import numpy as np

from cvlasso import _backend
from cvlasso.crossval import cv_lasso
from cvlasso.simlab import baseline_scenario, run_monte_carlo
from cvlasso.solver import SolverConfig, fit_path


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases(cfg):
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((200, 50)), rng.standard_normal(200)
    xw, yw = rng.standard_normal((100, 400)), rng.standard_normal(100)
    scen = baseline_scenario(replications=10)
    return {
        "path 200x50, 41 pts": lambda: fit_path(x, y, 0.05 * np.arange(41), cfg).betas,
        "path 100x400, 41 pts": lambda: fit_path(xw, yw, 0.05 * np.arange(41), cfg).betas,
        "cv fit 200x50": lambda: cv_lasso(x, y, seed=1, cfg=cfg).beta_cv,
        "simulate 10 reps": lambda: np.array([r.mspe for r in run_monte_carlo(scen, cfg).records]),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    names = sorted(_backend.BACKENDS)
    results = {}
    for name in names:
        for label, fn in cases(SolverConfig(backend=name)).items():
            results[label, name] = best_of(fn, args.repeat)

    print(f"{'case':24s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}{'max |diff|':>12s}")
    for label in cases(SolverConfig()):
        row = f"{label:24s}" + "".join(f"{results[label, n][0]:11.4f}s" for n in names)
        if len(names) == 2:
            (ta, a), (tb, b) = results[label, names[0]], results[label, names[1]]
            row += f"{tb / ta:9.1f}x{float(np.max(np.abs(a - b))):12.1e}"
        print(row)


if __name__ == "__main__":
    main()
