"""Final objective, time and iteration counts of HCGS, GFB and IPD on the
sparse low-rank recovery problem, one row per (N, solver), averaged over
seeds. HCGS runs over the trace-norm ball whose radius is the GFB
solution's trace norm.

    python3 scripts/comparison_table.py --N 50,100,200 --seeds 1,2,3
"""

import argparse
import tempfile

from hcgs.cli import Job, run_recover_job


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="50,100")
    ap.add_argument("--seeds", default="1,2,3")
    ap.add_argument("--obs-frac", type=float, default=0.4)
    ap.add_argument("--tol", type=float, default=1e-7)
    ap.add_argument("--out", default=None, help="keep traces here (default: temp dir)")
    args = ap.parse_args()
    sizes = [int(t) for t in args.N.split(",")]
    seeds = [int(t) for t in args.seeds.split(",")]
    out = args.out or tempfile.mkdtemp(prefix="hcgs_table_")
    cfg = dict(obs_frac=args.obs_frac, lambda1=None, lambda2=None, tau="auto",
               solvers=["hcgs", "gfb", "ipd"], tol=args.tol, max_iters=100000, out=out)
    print(f"{'N':>5} {'solver':>6} {'J x1e4':>10} {'time s':>9} {'iters':>8} {'s/iter':>9}")
    for N in sizes:
        rows = [r for seed in seeds for r in run_recover_job(Job(N, seed, cfg))]
        for solver in cfg["solvers"]:
            sel = [r for r in rows if r["solver"] == solver]
            mean = {k: sum(r[k] for r in sel) / len(sel)
                    for k in ("J_final", "time_seconds", "iterations", "time_per_iter")}
            print(f"{N:>5} {solver:>6} {mean['J_final'] * 1e4:>10.3f} {mean['time_seconds']:>9.3f} "
                  f"{mean['iterations']:>8.0f} {mean['time_per_iter']:>9.5f}", flush=True)
    print(f"traces in {out}")


if __name__ == "__main__":
    main()
