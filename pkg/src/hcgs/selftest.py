"""Fast invariant checklist behind ``hcgs selftest``.

Every check compares library code against an independent route (LAPACK
decompositions, enumeration, grids, finite differences) on small seeded
instances.
"""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np

from . import oracles
from .baselines import trace_norm_prox
from .linalg import dominant_eigpair, power_svd
from .solvers import (SolverConfig, cg_rate_bound, cg_solve, default_schedule, hcgs_solve)


def check_power_svd():
    rng = np.random.default_rng(11)
    for _ in range(20):
        Z = rng.normal(size=(6, 5))
        res = power_svd(Z, tol=1e-10, max_iters=20000, seed=1)
        s1 = np.linalg.svd(Z, compute_uv=False)[0]
        if abs(res.value - s1) > 1e-8 * s1:
            return False, f"sigma {res.value} vs {s1}"
    return True, "20 random 6x5 matrices"


def check_dominant_eigpair():
    rng = np.random.default_rng(12)
    for _ in range(20):
        M = rng.normal(size=(6, 6))
        S = M + M.T
        res = dominant_eigpair(S, tol=1e-10, max_iters=50000, seed=2)
        lam = np.linalg.eigvalsh(S)[-1]
        if abs(res.value - lam) > 1e-8 * max(1.0, abs(lam)):
            return False, f"lambda {res.value} vs {lam}"
    return True, "20 random symmetric 6x6 matrices"


def check_soft_threshold_prox():
    rng = np.random.default_rng(13)
    x = rng.normal(size=50) * 2
    gamma = 0.7
    grid = np.linspace(-6, 6, 120001)
    got = oracles.soft_threshold(x, gamma)
    for xi, gi in zip(x, got):
        obj = 0.5 * (xi - grid) ** 2 + gamma * np.abs(grid)
        best = grid[np.argmin(obj)]
        if abs(best - gi) > 2e-4:
            return False, f"prox({xi:.4f}) = {gi:.6f}, grid minimizer {best:.6f}"
    return True, "50 points vs 1-D grid"


def check_moreau_sandwich():
    rng = np.random.default_rng(14)
    lam, dim = 0.8, 5
    g = oracles.l1_term(lam, dim)
    L = g.lipschitz_const
    for _ in range(300):
        x = rng.normal(size=dim) * 3
        b1, b2 = sorted(rng.uniform(0.01, 3.0, size=2), reverse=True)
        gx = g.value(x)
        e1 = oracles.moreau_value(g, b1, x)
        e2 = oracles.moreau_value(g, b2, x)
        tol = 1e-10 * max(1.0, abs(gx))
        if not (e1 <= gx + tol and gx <= e1 + 0.5 * b1 * L**2 + tol):
            return False, f"g_beta <= g <= g_beta + beta L^2/2 violated at beta={b1:.3f}"
        if not (e1 <= e2 + tol and e2 <= e1 + 0.5 * (b1 - b2) * L**2 + tol):
            return False, "monotonicity in beta violated"
    return True, "300 random points"


def check_moreau_gradient():
    rng = np.random.default_rng(15)
    g = oracles.l1_term(1.3, 6)
    h = 1e-6
    for _ in range(50):
        x = rng.normal(size=6)
        beta = rng.uniform(0.1, 2.0)
        grad = oracles.moreau_gradient(g, beta, x)
        fd = np.array([(oracles.moreau_value(g, beta, x + h * e)
                        - oracles.moreau_value(g, beta, x - h * e)) / (2 * h)
                       for e in np.eye(6)])
        if np.linalg.norm(grad - fd) > 1e-5 * max(1.0, np.linalg.norm(fd)):
            return False, "gradient disagrees with central differences"
    return True, "50 points, central differences"


def check_lmo_optimality():
    rng = np.random.default_rng(16)
    verts = [s * e for e in np.eye(5) for s in (1.0, -1.0)]
    for _ in range(50):
        z = rng.normal(size=5)
        y = oracles.lmo_l1_ball(z, 1.0)
        if y @ z < max(v @ z for v in verts) - 1e-12:
            return False, "l1 ball LMO beaten by a vertex"
        Z = rng.normal(size=(5, 5))
        Y = oracles.lmo_trace_ball(Z, 2.0)
        s1 = np.linalg.svd(Z, compute_uv=False)[0]
        if np.vdot(Y, Z) < (1 - 1e-6) * 2.0 * s1:
            return False, "trace ball LMO below B sigma_1"
        S = Z + Z.T
        P = oracles.lmo_spectrahedron(S)
        if np.vdot(P, S) < np.linalg.eigvalsh(S)[-1] - 1e-6 * (1 + abs(np.linalg.eigvalsh(S)[-1])):
            return False, "spectrahedron LMO below lambda_max"
    return True, "50 instances per domain"


def check_cg_rate():
    d, B = 20, 1.0
    rng = np.random.default_rng(17)
    a = rng.normal(size=d)
    a *= 2 * B / np.sum(np.abs(a))
    f = oracles.SmoothTerm(lambda x: 0.5 * float((x - a) @ (x - a)), lambda x: x - a, 1.0, 1.0)
    rep = cg_solve(f, oracles.L1Ball(B), default_schedule(B, 0.0),
                   SolverConfig(max_iters=400), x1=np.eye(d)[0])
    fstar = 0.5 * float((_project_l1(a, B) - a) @ (_project_l1(a, B) - a))
    for row in rep.trace[1:]:
        if row.objective - fstar > cg_rate_bound(row.k, 1.0, B):
            return False, f"gap exceeds 8 L rho^2/(k+1) at k={row.k}"
    return True, "400 iterations, l1 ball in R^20"


def _project_l1(v, B):
    # bisection on the soft-threshold level
    if np.sum(np.abs(v)) <= B:
        return v.copy()
    lo, hi = 0.0, float(np.max(np.abs(v)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(np.maximum(np.abs(v) - mid, 0)) > B:
            lo = mid
        else:
            hi = mid
    return np.sign(v) * np.maximum(np.abs(v) - hi, 0)


def check_hcgs_reduction():
    d = 8
    rng = np.random.default_rng(18)
    Q = rng.normal(size=(d, d))
    Q = Q @ Q.T
    c = rng.normal(size=d)
    f = oracles.SmoothTerm(lambda x: 0.5 * float(x @ Q @ x) + float(c @ x),
                           lambda x: Q @ x + c, 1.0, float(np.linalg.norm(Q, 2)))
    sched = default_schedule(1.0, 0.0)
    cfg = SolverConfig(max_iters=60)
    x1 = np.eye(d)[2]
    r1 = cg_solve(f, oracles.L1Ball(1.0), sched, cfg, x1=x1)
    r2 = hcgs_solve(f, oracles.l1_term(0.5, d), oracles.zero_map((d,), (d,)),
                    oracles.L1Ball(1.0), sched, cfg, x1=x1)
    same = all(a.objective == b.objective for a, b in zip(r1.trace, r2.trace))
    if not (same and np.array_equal(r1.final_point, r2.final_point)):
        return False, "hybrid method with A = 0 departs from conditional gradient"
    return True, "60 iterations, bit-identical"


def check_trace_norm_prox():
    rng = np.random.default_rng(19)
    X = rng.normal(size=(6, 5))
    gamma = 0.9
    P = trace_norm_prox(X, gamma)
    want = np.maximum(np.linalg.svd(X, compute_uv=False) - gamma, 0)
    got = np.linalg.svd(P, compute_uv=False)
    if np.max(np.abs(want - got)) > 1e-8:
        return False, "singular values are not soft-thresholded"
    return True, "6x5 matrix"


CHECKS: list[tuple[str, Callable]] = [
    ("power_svd vs full SVD", check_power_svd),
    ("dominant_eigpair vs symmetric eigensolver", check_dominant_eigpair),
    ("soft_threshold is the l1 prox", check_soft_threshold_prox),
    ("Moreau sandwich", check_moreau_sandwich),
    ("Moreau gradient vs finite differences", check_moreau_gradient),
    ("LMO optimality", check_lmo_optimality),
    ("conditional gradient rate bound", check_cg_rate),
    ("hybrid reduces to conditional gradient", check_hcgs_reduction),
    ("trace-norm prox thresholds singular values", check_trace_norm_prox),
]


def run_selftest(out=print) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        try:
            with warnings.catch_warnings():
                # a slow power iteration is judged by the check itself
                warnings.simplefilter("ignore")
                ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    out("selftest " + ("passed" if ok_all else "FAILED"))
    return ok_all
