"""Proximal splitting baselines for the penalized recovery objective
``(1/2p)||Omega(Y - X)||^2 + lam1 ||X||_1 + lam2 ||X||_tr``.

Both methods take a full SVD per iteration in the trace-norm prox, which is
what makes them scale cubically in the matrix size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SolverDivergenceError
from .oracles import soft_threshold
from .problems import RecoveryInstance, recovery_loss
from .solvers import SolveReport, TraceRow, relative_change

DIVERGENCE_PATIENCE = 10


@dataclass
class ProxSplitConfig:
    """``step_size=None`` means ``0.9 * p_obs``, i.e. 0.9 over the gradient's
    Lipschitz constant."""

    step_size: float | None = None
    max_iters: int = 100000
    rel_change_tol: float = 1e-7
    relaxation: float = 1.0

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise InvalidParameterError("step_size must be positive")
        if not 0 < self.relaxation <= 1:
            raise InvalidParameterError("relaxation must lie in (0, 1]")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")


def trace_norm_prox(X, gamma: float) -> np.ndarray:
    """Singular value soft-thresholding ``U max(S - gamma, 0) V^T``."""
    if gamma < 0:
        raise InvalidParameterError("gamma must be nonnegative")
    X = np.asarray(X, dtype=float)
    if gamma == 0:
        return X.copy()
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    s = np.maximum(s - gamma, 0.0)
    keep = s > 0
    return (U[:, keep] * s[keep]) @ Vt[keep]


def _penalized_objective(instance, lam1, lam2):
    loss = recovery_loss(instance)

    def J(X):
        val = loss.value(X) + lam1 * float(np.sum(np.abs(X)))
        if lam2:
            val += lam2 * float(np.sum(np.linalg.svd(X, compute_uv=False)))
        return val

    return loss, J


def _iterate(instance, lam1, lam2, config, step, name):
    loss, J = _penalized_objective(instance, lam1, lam2)
    gamma = config.step_size if config.step_size is not None else 0.9 * instance.p_obs
    if gamma > instance.p_obs * (1 + 1e-12):
        raise InvalidParameterError("step_size must not exceed p_obs = 1/L_f")
    t0 = time.perf_counter()
    state = step.init(instance)
    obj = J(state.x)
    trace = [TraceRow(0, obj, obj, math.nan, time.perf_counter() - t0)]
    reason, increases, k = "max_iters", 0, 0
    for k in range(1, config.max_iters + 1):
        step.update(state, loss.gradient(state.x), gamma, lam1, lam2, config.relaxation)
        obj = J(state.x)
        r = relative_change(trace[-1].objective, obj)
        increases = increases + 1 if obj > trace[-1].objective else 0
        trace.append(TraceRow(k, obj, obj, r, time.perf_counter() - t0))
        if not math.isfinite(obj) or increases >= DIVERGENCE_PATIENCE:
            raise SolverDivergenceError(
                f"{name}: objective increased {increases} evaluations in a row "
                f"(k={k}, J={obj:.6g}); try a smaller step_size")
        if r < config.rel_change_tol:
            reason = "tolerance"
            break
    return SolveReport(final_point=state.x, iterations_run=k, trace=trace,
                       termination_reason=reason, info={"J_final": trace[-1].objective,
                                                        "step_size": gamma})


class _State:
    pass


class _GFB:
    """Generalized forward-backward with two equally weighted auxiliary
    variables, one per nonsmooth term."""

    def init(self, instance):
        s = _State()
        s.x = np.zeros_like(instance.Y)
        s.z1 = s.x.copy()
        s.z2 = s.x.copy()
        return s

    def update(self, s, grad, gamma, lam1, lam2, relax):
        fwd = 2.0 * s.x - gamma * grad
        # weight 1/2 per term doubles each prox parameter
        s.z1 += relax * (soft_threshold(fwd - s.z1, 2.0 * gamma * lam1) - s.x)
        s.z2 += relax * (trace_norm_prox(fwd - s.z2, 2.0 * gamma * lam2) - s.x)
        s.x = 0.5 * (s.z1 + s.z2)


class _IPD:
    """Forward step followed by the l1 and trace-norm proxes in sequence."""

    def init(self, instance):
        s = _State()
        s.x = np.zeros_like(instance.Y)
        return s

    def update(self, s, grad, gamma, lam1, lam2, relax):
        x = s.x - gamma * grad
        x = soft_threshold(x, gamma * lam1)
        x = trace_norm_prox(x, gamma * lam2)
        s.x = s.x + relax * (x - s.x)


def gfb_solve(instance: RecoveryInstance, lam1: float, lam2: float,
              config: ProxSplitConfig | None = None) -> SolveReport:
    return _iterate(instance, lam1, lam2, config or ProxSplitConfig(), _GFB(), "gfb")


def ipd_solve(instance: RecoveryInstance, lam1: float, lam2: float,
              config: ProxSplitConfig | None = None) -> SolveReport:
    return _iterate(instance, lam1, lam2, config or ProxSplitConfig(), _IPD(), "ipd")
