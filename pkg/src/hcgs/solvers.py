"""Conditional gradient and hybrid conditional gradient-smoothing engines."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .linalg import random_unit
from .oracles import (BoundedDomain, LinearMap, LipschitzTerm, SmoothTerm, identity_map,
                      moreau_value)

log = logging.getLogger(__name__)

BETA_FLOOR = 1e-12
FEASIBILITY_TOL = 1e-8
TRACE_COLUMNS = ("k", "objective", "smoothed_objective", "rel_change", "elapsed_seconds")


@dataclass(frozen=True)
class Schedule:
    alpha: Callable[[int], float]
    beta: Callable[[int], float]


def default_schedule(rho: float, A_norm: float, L_g: float | None = None) -> Schedule:
    """``alpha_k = 2/(k+1)`` and ``beta_k = beta / sqrt(k)``.

    ``beta = 2 sqrt(2) rho ||A|| / L_g`` minimizes the leading terms of the
    rate bound; without a composite term (``A_norm == 0`` or no ``L_g``) the
    smoothing parameter is unused and set to 1.
    """
    if not rho > 0:
        raise InvalidParameterError("rho must be positive")
    if A_norm > 0 and L_g:
        beta = 2.0 * math.sqrt(2.0) * rho * A_norm / L_g
    else:
        beta = 1.0
    return Schedule(alpha=lambda k: 2.0 / (k + 1), beta=lambda k: beta / math.sqrt(k))


def constant_beta_schedule(beta: float) -> Schedule:
    return Schedule(alpha=lambda k: 2.0 / (k + 1), beta=lambda k: beta / math.sqrt(k))


@dataclass
class SolverConfig:
    max_iters: int = 1000
    rel_change_tol: float = 0.0
    objective_eval_period: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if self.rel_change_tol < 0:
            raise InvalidParameterError("rel_change_tol must be >= 0")
        if self.objective_eval_period < 1:
            raise InvalidParameterError("objective_eval_period must be >= 1")


@dataclass(frozen=True)
class TraceRow:
    k: int
    objective: float
    smoothed_objective: float
    rel_change: float
    elapsed_seconds: float
    extra: dict = field(default_factory=dict)


@dataclass
class SolveReport:
    final_point: np.ndarray
    iterations_run: int
    trace: list[TraceRow]
    termination_reason: str
    lmo_nonconverged: int = 0
    info: dict = field(default_factory=dict)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([row.objective for row in self.trace])

    @property
    def final_objective(self) -> float:
        return self.trace[-1].objective

    @property
    def final_rel_change(self) -> float:
        return self.trace[-1].rel_change

    @property
    def elapsed_seconds(self) -> float:
        return self.trace[-1].elapsed_seconds

    def to_csv(self, path) -> None:
        write_trace_csv(path, self.trace)


def write_trace_csv(path, trace: Sequence[TraceRow]) -> None:
    extra_cols: list[str] = []
    for row in trace:
        for key in row.extra:
            if key not in extra_cols:
                extra_cols.append(key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(TRACE_COLUMNS) + extra_cols)
        for row in trace:
            w.writerow([row.k, repr(row.objective), repr(row.smoothed_objective),
                        repr(row.rel_change), repr(row.elapsed_seconds)]
                       + [row.extra.get(c, "") for c in extra_cols])


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: (float(v) if v != "" else None) for k, v in rec.items()}
                for rec in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# Rate bounds and stopping


def cg_rate_bound(k: int, L: float, rho: float) -> float:
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    return 8.0 * L * rho**2 / (k + 1)


def hcgs_rate_bound(k: int, p: float, L_f: float, rho: float, A_norm: float,
                    beta: float, L_g: float) -> float:
    """Objective-gap bound after ``k`` steps of the hybrid method with
    ``alpha_k = 2/(k+1)`` and ``beta_k = beta/sqrt(k)``, gap measured at
    ``x_{k+1}``."""
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if not 0 < p <= 1:
        raise InvalidParameterError("Hölder exponent must lie in (0, 1]")
    return ((4.0 * rho) ** (p + 1) * L_f / ((p + 1) * (k + 1) ** p)
            + 8.0 * rho**2 * A_norm**2 / (beta * math.sqrt(k + 1))
            + 0.5 * L_g**2 * beta * math.sqrt(k + 2) / k
            + L_g**2 * beta / (2.0 * math.sqrt(k + 1)))


def relative_change(prev: float, cur: float) -> float:
    """``|cur - prev| / |prev|``, falling back to ``|cur - prev|`` when
    ``prev`` is exactly zero."""
    if prev == 0.0:
        return abs(cur - prev)
    return abs((cur - prev) / prev)


def stop_on_relative_change(values: Sequence[float], tol: float) -> bool:
    if len(values) < 2:
        raise InvalidInputError("need at least two objective evaluations")
    return relative_change(values[-2], values[-1]) < tol


# ---------------------------------------------------------------------------
# Engines


def _initial_point(domain: BoundedDomain, x1, like_shape, seed: int):
    if x1 is None:
        if like_shape is None:
            raise InvalidInputError("x1 or an explicit shape is required")
        direction = random_unit(int(np.prod(like_shape)), seed).reshape(like_shape)
        x1 = domain.lmo(direction)
        domain.reset()
    x1 = np.array(x1, dtype=float)
    if domain.residual(x1) > FEASIBILITY_TOL * max(1.0, domain.radius):
        raise InvalidInputError("initial point is not feasible for the domain")
    return x1


def _run(direction, objective, smoothed, f: SmoothTerm | None, domain: BoundedDomain,
         schedule: Schedule, config: SolverConfig, x: np.ndarray, monitor) -> SolveReport:
    domain.reset()
    if f is not None:
        f.start(x)
    floored = False

    def beta_at(k):
        nonlocal floored
        b = schedule.beta(k)
        if b < BETA_FLOOR:
            if not floored:
                log.warning("smoothing parameter %.3g floored at %.0e (k=%d)", b, BETA_FLOOR, k)
                floored = True
            b = BETA_FLOOR
        return b

    paused = 0.0
    t0 = time.perf_counter()

    def record(k, x, prev):
        nonlocal paused
        obj = objective(x)
        r = math.nan if prev is None else relative_change(prev, obj)
        elapsed = time.perf_counter() - t0 - paused
        # report-only work below is kept off the clock
        tm = time.perf_counter()
        sm = smoothed(x, beta_at(k + 1))
        extra = dict(monitor(k, x)) if monitor is not None else {}
        paused += time.perf_counter() - tm
        return TraceRow(k, obj, sm, r, elapsed, extra)

    trace = [record(0, x, None)]
    reason = "max_iters"
    k = 0
    for k in range(1, config.max_iters + 1):
        z = direction(x, k, beta_at(k))
        y = domain.lmo(z)
        a = schedule.alpha(k)
        x_next = (1.0 - a) * x + a * y
        if f is not None:
            f.advance(x_next, y, a)
        x = x_next
        if k % config.objective_eval_period == 0 or k == config.max_iters:
            trace.append(record(k, x, trace[-1].objective))
            if config.rel_change_tol > 0 and trace[-1].rel_change < config.rel_change_tol:
                reason = "tolerance"
                break
    return SolveReport(final_point=x, iterations_run=k, trace=trace,
                       termination_reason=reason,
                       lmo_nonconverged=getattr(domain, "nonconverged", 0))


def cg_solve(f: SmoothTerm, domain: BoundedDomain, schedule: Schedule,
             config: SolverConfig | None = None, x1=None, shape=None,
             monitor=None) -> SolveReport:
    """Generalized conditional gradient: ``y_k = lmo(-grad f(x_k))``,
    ``x_{k+1} = (1 - alpha_k) x_k + alpha_k y_k``.

    Row ``k`` of the trace holds the objective at ``x_{k+1}`` (row 0 is the
    start point). Without ``x1`` the start is the LMO vertex of a seeded random
    direction, which needs ``shape``. ``monitor(k, x)`` may return a dict of
    extra trace columns; its run time is excluded from ``elapsed_seconds``.
    """
    config = config or SolverConfig()
    x = _initial_point(domain, x1, shape, config.seed)

    def direction(x, k, beta):
        return -f.gradient(x)

    def objective(x):
        return f.value(x)

    return _run(direction, objective, lambda x, beta: objective(x), f, domain,
                schedule, config, x, monitor)


def hcgs_solve(f: SmoothTerm | None, g: LipschitzTerm | None, A: LinearMap | None,
               domain: BoundedDomain, schedule: Schedule,
               config: SolverConfig | None = None, x1=None, shape=None,
               monitor=None) -> SolveReport:
    """Hybrid conditional gradient-smoothing for ``f + g o A`` over ``domain``.

    Step direction is ``-grad f(x) - A^*(A x - prox_{beta_k g}(A x)) / beta_k``,
    the negative gradient of ``f + g_{beta_k} o A``. ``f=None`` drops the
    smooth part, ``A=None`` means the identity. The trace records the true
    objective ``f + g o A`` (used by the stopping rule) next to the smoothed
    one at the following smoothing level.
    """
    if f is None and g is None:
        raise InvalidInputError("at least one of f and g is required")
    config = config or SolverConfig()
    x = _initial_point(domain, x1, shape, config.seed)
    if g is not None and A is None:
        A = identity_map()

    def direction(x, k, beta):
        z = -f.gradient(x) if f is not None else None
        if g is not None:
            Ax = A.apply(x)
            corr = A.adjoint(Ax - g.prox(Ax, beta)) / beta
            z = -corr if z is None else z - corr
        return z

    def objective(x):
        val = f.value(x) if f is not None else 0.0
        if g is not None:
            val += g.value(A.apply(x))
        return val

    def smoothed(x, beta):
        val = f.value(x) if f is not None else 0.0
        if g is not None:
            val += moreau_value(g, beta, A.apply(x))
        return val

    return _run(direction, objective, smoothed, f, domain, schedule, config, x, monitor)
