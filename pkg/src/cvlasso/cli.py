"""Command-line interface: ``fit``, ``path``, ``simulate`` and ``bound``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure
(non-convergence with ``--strict``).
"""
import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, bounds, simlab
from .crossval import DEFAULT_DELTA, GENERATOR_ID, cv_lasso
from .csvio import fmt, load_csv_matrix, load_csv_vector
from .solver import SolverConfig, fit_path

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    design: str | None = None
    response: str | None = None
    scenario: str | None = None
    delta: float | None = None
    n1: int | None = None
    n2: int | None = None
    seed: int | None = None
    tol: float = 1e-8
    max_iter: int = 50_000
    reps: int | None = None
    out: str = "-"
    format: str = "jsonl"
    strict: bool = False
    workers: int = 1
    grid: str | None = None
    n_grid: int | None = None
    sweep: str | None = None

    def __post_init__(self):
        if self.command in ("fit", "path"):
            if self.scenario is not None or self.design is None or self.response is None:
                raise UsageError(f"{self.command} needs --design and --response (and no --scenario)")
        if self.command == "simulate":
            if self.scenario is None or self.design is not None or self.response is not None:
                raise UsageError("simulate needs --scenario (and no data files)")
        if self.delta is not None and not self.delta > 0:
            raise UsageError(f"--delta must be positive, got {self.delta}")
        if self.format not in ("csv", "jsonl"):
            raise UsageError(f"unknown format {self.format!r}")

    def solver(self):
        return SolverConfig(tol=self.tol, max_iter=self.max_iter)


def _meta(cfg, seed, **extra):
    rec = {
        "record": "meta",
        "tool": "cvlasso",
        "version": __version__,
        "generator": GENERATOR_ID,
        "seed": seed,
        "backend": cfg.solver().kernels.NAME,
        # output location and worker count do not affect results
        "config": {k: v for k, v in dataclasses.asdict(cfg).items() if k not in ("out", "workers")},
    }
    rec.update(extra)
    return rec


def _jsonl(records):
    return "".join(json.dumps(r, sort_keys=False, allow_nan=True) + "\n" for r in records)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return fmt(v)


def _csv_report(meta_lines, header, rows):
    out = [f"# {json.dumps(m)}" for m in meta_lines]
    out.append(",".join(header))
    out.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def _emit(cfg, text):
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8")


def _check_convergence(cfg, ok, what):
    if ok:
        return
    msg = f"{what}: some solves did not converge within max_iter={cfg.max_iter}"
    if cfg.strict:
        raise NumericalFailure(msg)
    print(f"warning: {msg}", file=sys.stderr)


def _load_data(cfg):
    x = load_csv_matrix(cfg.design)
    y = load_csv_vector(cfg.response)
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"response has {y.shape[0]} rows, design has {x.shape[0]}")
    return x, y


def cmd_fit(cfg):
    x, y = _load_data(cfg)
    seed = 0 if cfg.seed is None else cfg.seed
    delta = DEFAULT_DELTA if cfg.delta is None else cfg.delta
    override = None if cfg.n1 is None and cfg.n2 is None else (cfg.n1, cfg.n2)
    est = cv_lasso(x, y, delta=delta, grid_override=override, seed=seed, cfg=cfg.solver())
    _check_convergence(cfg, est.diagnostics["all_converged"], "fit")
    result = {
        "record": "estimate",
        "k_hat": est.k_hat,
        "k_hat_1": est.k_hat_1,
        "k_hat_2": est.k_hat_2,
        "sigma2_hat": est.sigma2_hat,
        "n1": est.grid.n1,
        "n2": est.grid.n2,
        "delta": est.grid.delta,
        "seed": est.seed,
        "generator": est.generator,
        "size_i": est.diagnostics["size_i"],
        "converged": est.diagnostics["all_converged"],
        "iterations": est.diagnostics["iterations"],
        "beta_cv": est.beta_cv.tolist(),
    }
    meta = _meta(cfg, seed)
    if cfg.format == "jsonl":
        text = _jsonl([meta, result])
    else:
        rows = [[k, v] for k, v in result.items() if k not in ("record", "beta_cv")]
        rows += [[f"beta_{j + 1}", float(b)] for j, b in enumerate(est.beta_cv)]
        text = _csv_report([meta], ["field", "value"], rows)
    _emit(cfg, text)
    return EXIT_OK


def _path_grid(cfg):
    if cfg.grid is not None:
        try:
            return [float(v) for v in cfg.grid.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"--grid must be comma-separated numbers, got {cfg.grid!r}") from None
    if cfg.n_grid is None:
        raise UsageError("path needs --grid or --n-grid (with --delta)")
    delta = DEFAULT_DELTA if cfg.delta is None else cfg.delta
    return (delta * np.arange(cfg.n_grid + 1)).tolist()


def cmd_path(cfg):
    x, y = _load_data(cfg)
    grid = _path_grid(cfg)
    path = fit_path(x, y, grid, cfg.solver())
    _check_convergence(cfg, all(f.converged for f in path.fits), "path")
    p = x.shape[1]
    header = ["k", "l1_norm", "residual_ss", "iterations", "converged"] + [f"beta_{j + 1}" for j in range(p)]
    rows = [[f.k, float(np.sum(np.abs(f.beta))), f.residual_ss, f.iterations, f.converged, *f.beta.tolist()]
            for f in path.fits]
    meta = _meta(cfg, None)
    if cfg.format == "jsonl":
        recs = [meta] + [{"record": "path_point", **dict(zip(header[:5], r[:5])), "beta": r[5:]} for r in rows]
        text = _jsonl(recs)
    else:
        text = _csv_report([meta], header, rows)
    _emit(cfg, text)
    return EXIT_OK


def load_scenario(path):
    path = Path(path)
    spec = json.loads(path.read_text(encoding="utf-8"))
    design = None
    design_file = spec.get("design_file")
    if design_file is not None:
        fp = Path(design_file)
        if not fp.is_absolute():
            fp = path.parent / fp
        design = load_csv_matrix(fp)
    known = {"n", "p", "beta_star", "sigma", "delta", "replications", "master_seed",
             "design_family", "design_file"}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"{path}: unknown scenario keys {sorted(unknown)}")
    return simlab.Scenario(
        n=int(spec["n"]), p=int(spec["p"]), beta_star=np.asarray(spec["beta_star"], dtype=np.float64),
        sigma=float(spec.get("sigma", 1.0)), delta=float(spec.get("delta", DEFAULT_DELTA)),
        replications=int(spec.get("replications", 100)), master_seed=int(spec.get("master_seed", 0)),
        design_family=spec.get("design_family", "gaussian-iid"), design=design, design_file=design_file,
    )


def _report_records(rep, tag=None):
    d = rep.to_dict()
    extra = {} if tag is None else {"n": tag}
    recs = [{"record": "replicate", **extra, **r} for r in d["records"]]
    recs.append({"record": "aggregates", **extra, **d["aggregates"]})
    recs.append({"record": "bounds", **extra, "bound_report": d["bound_report"],
                 "dominates_thm1": d["dominates_thm1"], "dominates_thm2": d["dominates_thm2"],
                 "warnings": d["warnings"]})
    return recs


def cmd_simulate(cfg):
    sc = load_scenario(cfg.scenario)
    changes = {}
    if cfg.reps is not None:
        changes["replications"] = cfg.reps
    if cfg.seed is not None:
        changes["master_seed"] = cfg.seed
    if cfg.delta is not None:
        changes["delta"] = cfg.delta
    sc = dataclasses.replace(sc, **changes)
    solver = cfg.solver()
    if cfg.sweep:
        n_values = [int(v) for v in cfg.sweep.split(",") if v.strip()]
        reports = simlab.consistency_sweep(sc, n_values, solver, workers=cfg.workers)
    else:
        n_values = [None]
        reports = [simlab.run_monte_carlo(sc, solver, workers=cfg.workers)]
    for rep in reports:
        _check_convergence(cfg, rep.aggregates["all_converged"], "simulate")
    meta = _meta(cfg, sc.master_seed, scenario=sc.to_dict())
    if cfg.format == "jsonl":
        recs = [meta]
        for n, rep in zip(n_values, reports):
            recs += _report_records(rep, n)
        text = _jsonl(recs)
    else:
        metas = [meta]
        for n, rep in zip(n_values, reports):
            d = rep.to_dict()
            metas.append({"record": "summary", "n": rep.scenario.n, "aggregates": d["aggregates"],
                          "bound_report": d["bound_report"], "dominates_thm1": d["dominates_thm1"],
                          "dominates_thm2": d["dominates_thm2"], "warnings": d["warnings"]})
        fields = [f.name for f in dataclasses.fields(simlab.ReplicateRecord)]
        rows = [[rep.scenario.n, *(getattr(r, k) for k in fields)]
                for rep in reports for r in rep.records]
        text = _csv_report(metas, ["n", *fields], rows)
    _emit(cfg, text)
    return EXIT_OK


def cmd_bound(args):
    try:
        b = bounds.BoundInputs(n=args.n, p=args.p, sigma=args.sigma, l_star=args.l_star,
                               delta=args.delta, m_stat=args.m, l1=args.l1, l2=args.l2)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rep = bounds.bound_report(b)
    d = rep.as_dict()
    if args.format == "jsonl":
        text = _jsonl([{"record": "bounds", "inputs": dataclasses.asdict(b), **d}])
    else:
        text = "field,value\n" + "".join(f"{k},{_cell(v)}\n" for k, v in d.items())
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="cvlasso", description="Cross-validated primal Lasso and its risk bounds.")
    parser.add_argument("--version", action="version", version=f"cvlasso {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--format", default="jsonl", choices=["csv", "jsonl", "json-lines"])
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--max-iter", type=int, default=50_000)
        sp.add_argument("--strict", action="store_true", help="exit 4 if any solve fails to converge")

    fit = sub.add_parser("fit", help="cross-validated fit of a CSV dataset")
    fit.add_argument("--design", required=True)
    fit.add_argument("--response", required=True)
    fit.add_argument("--delta", type=float)
    fit.add_argument("--n1", type=int)
    fit.add_argument("--n2", type=int)
    fit.add_argument("--seed", type=int, default=0)
    common(fit)

    path = sub.add_parser("path", help="constrained fits along a budget grid")
    path.add_argument("--design", required=True)
    path.add_argument("--response", required=True)
    path.add_argument("--grid", help="comma-separated ascending budgets")
    path.add_argument("--n-grid", type=int, help="use the grid 0, delta, ..., N*delta")
    path.add_argument("--delta", type=float)
    common(path)

    sim = sub.add_parser("simulate", help="Monte Carlo check of the bounds")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--reps", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--delta", type=float)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--sweep", help="comma-separated ascending sample sizes")
    common(sim)

    bd = sub.add_parser("bound", help="evaluate the closed-form bounds")
    for name, typ in [("--n", int), ("--p", int), ("--sigma", float), ("--l-star", float),
                      ("--delta", float), ("--m", float), ("--l1", float), ("--l2", float)]:
        bd.add_argument(name, type=typ, required=True)
    bd.add_argument("--out", default="-")
    bd.add_argument("--format", default="csv", choices=["csv", "jsonl", "json-lines"])
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.format == "json-lines":
            args.format = "jsonl"
        if args.command == "bound":
            return cmd_bound(args)
        opts = {k: v for k, v in vars(args).items() if k in {f.name for f in dataclasses.fields(RunConfig)}}
        cfg = RunConfig(**opts)
        return {"fit": cmd_fit, "path": cmd_path, "simulate": cmd_simulate}[args.command](cfg)
    except UsageError as e:
        print(f"cvlasso: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as e:
        print(f"cvlasso: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        msg = str(e).replace("\n", " ")
        print(f"cvlasso: data error: {type(e).__name__}: {msg}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
