"""Run time of the sparse PCA relaxation against n and the fitted log-log
slope, with the planted-direction overlap of each solution.

    python3 scripts/spca_scaling.py --n 50,100,200 --seeds 1,2
"""

import argparse
import warnings

import numpy as np

from hcgs.problems import gen_spca_instance, solve_spca_hcgs
from hcgs.solvers import SolverConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="50,100,200")
    ap.add_argument("--seeds", default="1")
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--tol", type=float, default=1e-5)
    args = ap.parse_args()
    sizes = [int(t) for t in args.n.split(",")]
    seeds = [int(t) for t in args.seeds.split(",")]
    times = []
    print(f"{'n':>5} {'time s':>9} {'iters':>7} {'overlap':>8} {'objective':>12}")
    for n in sizes:
        t, it, ov, obj = [], [], [], []
        for seed in seeds:
            inst = gen_spca_instance(n, seed=seed, lam=args.lam)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rep = solve_spca_hcgs(inst, SolverConfig(max_iters=100000,
                                                         rel_change_tol=args.tol, seed=seed))
            t.append(rep.elapsed_seconds)
            it.append(rep.iterations_run)
            ov.append(rep.info["overlap"])
            obj.append(rep.final_objective)
        times.append(np.mean(t))
        print(f"{n:>5} {np.mean(t):>9.3f} {np.mean(it):>7.0f} {np.mean(ov):>8.3f} "
              f"{np.mean(obj):>12.2f}", flush=True)
    if len(sizes) > 1:
        print(f"slope: {np.polyfit(np.log(sizes), np.log(times), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
