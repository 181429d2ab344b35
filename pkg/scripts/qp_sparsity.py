"""Objective and support size of the l1-constrained QP iterates, showing the
one-new-nonzero-per-step growth.

    python3 scripts/qp_sparsity.py --d 1000 --iters 200
"""

import argparse

from hcgs.problems import gen_sparse_qp_instance, solve_sparse_qp_hcgs
from hcgs.solvers import SolverConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=1000)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--every", type=int, default=20)
    args = ap.parse_args()
    inst = gen_sparse_qp_instance(args.d, seed=args.seed, lam=args.lam)
    rep = solve_sparse_qp_hcgs(inst, SolverConfig(max_iters=args.iters))
    print(f"{'k':>6} {'objective':>14} {'nnz':>6}")
    for row in rep.trace:
        if row.k % args.every == 0 or row.k == rep.iterations_run:
            print(f"{row.k:>6} {row.objective:>14.6f} {row.extra['nnz']:>6}")
    print(f"{rep.elapsed_seconds:.3f} s for {rep.iterations_run} iterations")


if __name__ == "__main__":
    main()
