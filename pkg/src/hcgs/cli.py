"""Experiment runner: ``hcgs recover | spca | qp | selftest``.

Every subcommand accepts ``--config FILE``, an INI-style file with one
section per subcommand holding ``key = value`` lines whose keys are the
long option names (dashes or underscores). Command-line flags override the
file. Exit codes: 0 ok, 1 failed run or failed selftest, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import ProxSplitConfig, gfb_solve, ipd_solve
from .errors import SolverDivergenceError
from .oracles import trace_norm
from .problems import (gen_recovery_instance, gen_sparse_qp_instance, gen_spca_instance,
                       solve_recovery_hcgs, solve_sparse_qp_hcgs, solve_spca_hcgs,
                       write_manifest)
from .selftest import run_selftest
from .solvers import SolverConfig

log = logging.getLogger("hcgs")

RECOVER_SOLVERS = ("hcgs", "gfb", "ipd")
SUMMARY_COLUMNS = ("N", "solver", "seed", "J_final", "r_final", "time_seconds",
                   "iterations", "time_per_iter")


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(t) for t in str(text).replace(" ", "").split(",") if t]


def _str_list(text):
    return [t for t in str(text).replace(" ", "").split(",") if t]


def _float_or_auto(text):
    return text if str(text) == "auto" else float(text)


def _float_or_none(text):
    return None if str(text) in ("", "none", "None") else float(text)


# option name -> (parser, default, help)
OPTIONS = {
    "recover": {
        "N": (_int_list, [50], "matrix sizes, comma separated"),
        "obs_frac": (float, 0.4, "fraction of observed entries"),
        "lambda1": (_float_or_none, None, "l1 weight (default 1/N^2)"),
        "lambda2": (_float_or_none, None, "trace-norm weight (default 1e-3/N^2)"),
        "tau": (_float_or_auto, "auto", "trace-norm radius, or 'auto' for the GFB solution's"),
        "solvers": (_str_list, list(RECOVER_SOLVERS), "subset of hcgs,gfb,ipd"),
        "seeds": (_int_list, [1], "instance seeds"),
        "tol": (float, 1e-7, "relative-change stopping tolerance"),
        "max_iters": (int, 100000, "iteration cap per solver"),
        "workers": (int, 1, "parallel worker processes"),
        "out": (str, "results/recover", "output directory"),
    },
    "spca": {
        "n": (_int_list, [50, 100, 200], "matrix sizes"),
        "lam": (float, 1.0, "l1 weight"),
        "seeds": (_int_list, [1], "instance seeds"),
        "tol": (float, 1e-5, "relative-change stopping tolerance"),
        "max_iters": (int, 100000, "iteration cap"),
        "workers": (int, 1, "parallel worker processes"),
        "out": (str, "results/spca", "output directory"),
    },
    "qp": {
        "d": (_int_list, [1000], "dimensions"),
        "lam": (float, 0.1, "fused-penalty weight (0 gives the plain l1-constrained QP)"),
        "B": (float, 1.0, "l1 radius"),
        "seeds": (_int_list, [1], "instance seeds"),
        "tol": (float, 0.0, "relative-change stopping tolerance (0 disables)"),
        "max_iters": (int, 200, "iteration cap"),
        "workers": (int, 1, "parallel worker processes"),
        "out": (str, "results/qp", "output directory"),
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcgs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with a [%s] section" % name)
        for key, (_, default, help_) in opts.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=f"{help_} (default: {default})")
    sub.add_parser("selftest", help="run the invariant checklist")
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, the config file section and flags, validating keys
    and values before any computation."""
    opts = OPTIONS[command]
    raw = {key: default for key, (_, default, _) in opts.items()}
    if args.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(args.config):
            raise UsageError(f"cannot read config file {args.config}")
        if cp.has_section(command):
            for key, val in cp.items(command):
                key = key.replace("-", "_")
                if key not in opts:
                    raise UsageError(f"unknown key {key!r} in [{command}] of {args.config}")
                raw[key] = val
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key, (parse, default, _) in opts.items():
        val = raw[key]
        try:
            cfg[key] = parse(val) if isinstance(val, str) else val
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {val!r} ({exc})") from None
    _validate(command, cfg)
    return cfg


def _validate(command, cfg):
    if cfg.get("workers", 1) < 1:
        raise UsageError("workers must be >= 1")
    if cfg.get("max_iters", 1) < 1:
        raise UsageError("max_iters must be >= 1")
    if command == "recover":
        if not 0 < cfg["obs_frac"] <= 1:
            raise UsageError("obs_frac must lie in (0, 1]")
        bad = set(cfg["solvers"]) - set(RECOVER_SOLVERS)
        if bad or not cfg["solvers"]:
            raise UsageError(f"unknown solvers {sorted(bad)}; choose from {RECOVER_SOLVERS}")
        if cfg["tau"] != "auto" and not cfg["tau"] > 0:
            raise UsageError("tau must be positive or 'auto'")
        if any(N < 5 for N in cfg["N"]):
            raise UsageError("N must be >= 5")
    if command == "spca" and any(n < 10 for n in cfg["n"]):
        raise UsageError("n must be >= 10")
    if command == "qp" and any(d < 2 for d in cfg["d"]):
        raise UsageError("d must be >= 2")


# ---------------------------------------------------------------------------
# Jobs (module level so they pickle for worker processes)


@dataclass(frozen=True)
class Job:
    size: int
    seed: int
    cfg: dict


def _hcgs_eval_period(N: int) -> int:
    return 1 if N <= 200 else 10


def run_recover_job(job: Job) -> list[dict]:
    N, seed, cfg = job.size, job.seed, job.cfg
    out = Path(cfg["out"]) / f"N{N}"
    out.mkdir(parents=True, exist_ok=True)
    inst = gen_recovery_instance(N, obs_frac=cfg["obs_frac"], seed=seed)
    lam1 = cfg["lambda1"] if cfg["lambda1"] is not None else 1.0 / N**2
    lam2 = cfg["lambda2"] if cfg["lambda2"] is not None else 1e-3 / N**2
    prox_cfg = ProxSplitConfig(max_iters=cfg["max_iters"], rel_change_tol=cfg["tol"])
    rows = []
    gfb_report = None
    if "gfb" in cfg["solvers"] or cfg["tau"] == "auto":
        gfb_report = gfb_solve(inst, lam1, lam2, prox_cfg)
    for solver in cfg["solvers"]:
        if solver == "gfb":
            rep = gfb_report
        elif solver == "ipd":
            rep = ipd_solve(inst, lam1, lam2, prox_cfg)
        else:
            tau = trace_norm(gfb_report.final_point) if cfg["tau"] == "auto" else cfg["tau"]
            scfg = SolverConfig(max_iters=cfg["max_iters"], rel_change_tol=cfg["tol"],
                                objective_eval_period=_hcgs_eval_period(N), seed=seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rep = solve_recovery_hcgs(inst, lam1, tau, scfg, lam2=lam2)
            rep.info["tau"] = tau
        rep.to_csv(out / f"trace_{solver}_{seed}.csv")
        rows.append(dict(N=N, solver=solver, seed=seed, J_final=rep.info["J_final"],
                         r_final=rep.final_rel_change, time_seconds=rep.elapsed_seconds,
                         iterations=rep.iterations_run,
                         time_per_iter=rep.elapsed_seconds / rep.iterations_run))
    return rows


def run_spca_job(job: Job) -> list[dict]:
    n, seed, cfg = job.size, job.seed, job.cfg
    out = Path(cfg["out"]) / f"n{n}"
    out.mkdir(parents=True, exist_ok=True)
    inst = gen_spca_instance(n, seed=seed, lam=cfg["lam"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = solve_spca_hcgs(inst, SolverConfig(max_iters=cfg["max_iters"],
                                                 rel_change_tol=cfg["tol"], seed=seed))
    rep.to_csv(out / f"trace_hcgs_{seed}.csv")
    return [dict(n=n, seed=seed, time_seconds=rep.elapsed_seconds,
                 iterations=rep.iterations_run, overlap_with_planted=rep.info["overlap"],
                 objective=rep.final_objective)]


def run_qp_job(job: Job) -> list[dict]:
    d, seed, cfg = job.size, job.seed, job.cfg
    out = Path(cfg["out"]) / f"d{d}"
    out.mkdir(parents=True, exist_ok=True)
    inst = gen_sparse_qp_instance(d, seed=seed, B=cfg["B"], lam=cfg["lam"])
    rep = solve_sparse_qp_hcgs(inst, SolverConfig(max_iters=cfg["max_iters"],
                                                  rel_change_tol=cfg["tol"], seed=seed))
    rep.to_csv(out / f"trace_hcgs_{seed}.csv")
    # row k holds x_{k+1}, which has at most k + 1 nonzeros
    nnz_ok = all(row.extra["nnz"] <= row.k + 1 for row in rep.trace)
    return [dict(d=d, seed=seed, objective=rep.final_objective,
                 iterations=rep.iterations_run, time_seconds=rep.elapsed_seconds,
                 max_nnz=max(row.extra["nnz"] for row in rep.trace),
                 nnz_bound_holds=int(nnz_ok))]


JOB_RUNNERS = {"recover": run_recover_job, "spca": run_spca_job, "qp": run_qp_job}
SIZE_KEY = {"recover": "N", "spca": "n", "qp": "d"}


def _run_jobs(command, cfg) -> list[dict]:
    jobs = [Job(size, seed, cfg) for size in cfg[SIZE_KEY[command]] for seed in cfg["seeds"]]
    runner = JOB_RUNNERS[command]
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(runner, jobs))
    else:
        results = [runner(job) for job in jobs]
    return [row for rows in results for row in rows]


def _mean_rows(rows, group_keys, value_keys):
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in group_keys), []).append(row)
    out = []
    for key, members in groups.items():
        agg = dict(zip(group_keys, key))
        agg["seed"] = "mean"
        for v in value_keys:
            agg[v] = float(np.mean([m[v] for m in members]))
        out.append(agg)
    return out


def write_summary(path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns))
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def cmd_experiment(command: str, cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.txt",
                   dict(command=command, **{k: _fmt(v) for k, v in cfg.items()}))
    t0 = time.perf_counter()
    rows = _run_jobs(command, cfg)
    if command == "recover":
        cols = SUMMARY_COLUMNS
        means = _mean_rows(rows, ("N", "solver"),
                           ("J_final", "r_final", "time_seconds", "iterations", "time_per_iter"))
    elif command == "spca":
        cols = ("n", "seed", "time_seconds", "iterations", "overlap_with_planted", "objective")
        means = _mean_rows(rows, ("n",), cols[2:])
    else:
        cols = ("d", "seed", "objective", "iterations", "time_seconds", "max_nnz",
                "nnz_bound_holds")
        means = _mean_rows(rows, ("d",), cols[2:])
    write_summary(out / "summary.csv", rows + means, cols)
    for row in rows:
        print(", ".join(f"{k}={_fmt(row[k])}" for k in cols))
    log.info("%s finished in %.1f s; outputs in %s", command, time.perf_counter() - t0, out)
    return 0


def _fmt(v):
    if isinstance(v, list):
        return ",".join(str(x) for x in v)
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        return 0 if run_selftest() else 1
    try:
        cfg = resolve_config(args.command, args)
    except UsageError as exc:
        print(f"hcgs {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        return cmd_experiment(args.command, cfg)
    except SolverDivergenceError as exc:
        print(f"hcgs {args.command}: solver diverged: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"hcgs {args.command}: I/O failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
