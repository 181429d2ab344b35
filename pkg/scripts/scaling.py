"""Average seconds per iteration of HCGS and GFB against the matrix size N,
with a fixed iteration budget, plus the fitted log-log slope.

    python3 scripts/scaling.py --N 100,200,400,800
"""

import argparse
import warnings

import numpy as np

from hcgs.baselines import ProxSplitConfig, gfb_solve
from hcgs.oracles import trace_norm
from hcgs.problems import gen_recovery_instance, solve_recovery_hcgs
from hcgs.solvers import SolverConfig


def per_iteration(N, seed, hcgs_iters, gfb_iters):
    inst = gen_recovery_instance(N, seed=seed)
    lam1, lam2 = 1.0 / N**2, 1e-3 / N**2
    tau = trace_norm(inst.ground_truth)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = solve_recovery_hcgs(inst, lam1, tau, SolverConfig(max_iters=hcgs_iters))
    g = gfb_solve(inst, lam1, lam2, ProxSplitConfig(max_iters=gfb_iters, rel_change_tol=0.0))
    return h.elapsed_seconds / h.iterations_run, g.elapsed_seconds / g.iterations_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="100,200,400,800")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--hcgs-iters", type=int, default=100)
    ap.add_argument("--gfb-iters", type=int, default=10)
    args = ap.parse_args()
    sizes = [int(t) for t in args.N.split(",")]
    h, g = [], []
    print(f"{'N':>5} {'hcgs s/iter':>12} {'gfb s/iter':>12}")
    for N in sizes:
        th, tg = per_iteration(N, args.seed, args.hcgs_iters, args.gfb_iters)
        h.append(th)
        g.append(tg)
        print(f"{N:>5} {th:>12.5f} {tg:>12.5f}", flush=True)
    if len(sizes) > 1:
        x = np.log(sizes)
        print(f"slope: hcgs {np.polyfit(x, np.log(h), 1)[0]:.2f}, "
              f"gfb {np.polyfit(x, np.log(g), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
