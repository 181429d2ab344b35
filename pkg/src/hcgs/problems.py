"""Ready-to-run problems: sparse low-rank matrix recovery over a trace-norm
ball, the sparse PCA relaxation over the spectrahedron, and l1-constrained
quadratic programs with composite penalties. Includes the synthetic instance
generators and directory serialization for exact replay."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .linalg import SpectralConfig, read_matrix_market, write_matrix_market
from .oracles import (L1Ball, LinearMap, LipschitzTerm, SmoothTerm, Spectrahedron,
                      TraceBall, difference_map, identity_map, l1_term, linear_term,
                      trace_norm)
from .solvers import (Schedule, SolveReport, SolverConfig, default_schedule,
                      hcgs_solve)

# ---------------------------------------------------------------------------
# Matrix recovery


@dataclass(frozen=True)
class SamplingMask:
    observed_mask: np.ndarray  # boolean, True where observed

    @property
    def dims(self) -> tuple[int, int]:
        return self.observed_mask.shape

    @property
    def observed(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(*np.nonzero(self.observed_mask))}

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.observed_mask))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.observed_mask, X, 0.0)


@dataclass(frozen=True)
class RecoveryInstance:
    ground_truth: np.ndarray
    Y: np.ndarray
    mask: SamplingMask
    noise_variance: float
    params: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.Y.shape[0]

    @property
    def p_obs(self) -> int:
        return self.mask.count


def _zero_fraction(rng, a: np.ndarray, frac: float) -> np.ndarray:
    n_zero = int(round(frac * a.size))
    flat = a.ravel().copy()
    flat[rng.permutation(a.size)[:n_zero]] = 0.0
    return flat.reshape(a.shape)


def gen_recovery_instance(N: int, rank: int = 5, zero_frac: float = 0.9,
                          noise_variance: float = 1e-4, obs_frac: float = 0.4,
                          seed: int = 0) -> RecoveryInstance:
    """Sparse low-rank ``U V^T`` plus Gaussian noise, observed on a uniformly
    drawn subset of ``round(obs_frac * N^2)`` entries.

    ``U`` and ``V`` are ``N x rank`` with uniform [0, 1] entries, of which a
    uniformly chosen ``zero_frac`` are set to zero in each. Noise is added to
    every entry before masking.
    """
    if N < rank:
        raise InvalidParameterError("N must be at least the rank")
    if not 0 < obs_frac <= 1:
        raise InvalidParameterError("obs_frac must lie in (0, 1]")
    if not 0 <= zero_frac <= 1:
        raise InvalidParameterError("zero_frac must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    U = _zero_fraction(rng, rng.uniform(size=(N, rank)), zero_frac)
    V = _zero_fraction(rng, rng.uniform(size=(N, rank)), zero_frac)
    M = U @ V.T
    noisy = M + rng.normal(scale=math.sqrt(noise_variance), size=(N, N))
    n_obs = int(round(obs_frac * N * N))
    mask = np.zeros(N * N, dtype=bool)
    mask[rng.choice(N * N, size=n_obs, replace=False)] = True
    mask = mask.reshape(N, N)
    params = dict(N=N, rank=rank, zero_frac=zero_frac, noise_variance=noise_variance,
                  obs_frac=obs_frac, seed=seed)
    return RecoveryInstance(M, np.where(mask, noisy, 0.0), SamplingMask(mask),
                            noise_variance, params)


def recovery_loss(instance: RecoveryInstance) -> SmoothTerm:
    """``(1/2p) ||Omega(Y - X)||_F^2``; gradient ``(1/p) Omega(X - Y)`` is
    ``1/p``-Lipschitz."""
    p = instance.p_obs
    m = instance.mask.observed_mask
    Y = instance.Y

    def value(X):
        R = np.where(m, X - Y, 0.0)
        return float(np.vdot(R, R)) / (2.0 * p)

    def gradient(X):
        return np.where(m, X - Y, 0.0) / p

    return SmoothTerm(value, gradient, holder_exponent=1.0, holder_const=1.0 / p)


def recovery_objective_J(X, instance: RecoveryInstance, lam1: float, lam2: float) -> float:
    X = np.asarray(X, dtype=float)
    val = recovery_loss(instance).value(X) + lam1 * float(np.sum(np.abs(X)))
    if lam2:
        val += lam2 * trace_norm(X)
    return val


def recovery_lg(instance: RecoveryInstance, lam1: float) -> float:
    return lam1 * instance.N


def solve_recovery_hcgs(instance: RecoveryInstance, lam1: float, tau: float,
                        config: SolverConfig | None = None, *,
                        lam2: float | None = None,
                        schedule: Schedule | None = None,
                        spectral: SpectralConfig | None = None,
                        symmetric: bool = False, x1=None, monitor=None) -> SolveReport:
    """Minimize ``(1/2p)||Omega(Y - X)||^2 + lam1 ||X||_1`` over
    ``||X||_tr <= tau`` with the hybrid method.

    The step direction reduces to
    ``-grad f(X) - X/beta_k + soft_threshold(X, beta_k lam1)/beta_k``.
    With ``symmetric=True`` the search is restricted to symmetric matrices;
    a symmetric ``x1`` then keeps every iterate exactly symmetric. When
    ``lam2`` is given, the penalized objective of the final point is stored
    in ``report.info["J_final"]``.
    """
    if not tau > 0:
        raise InvalidParameterError("tau must be positive")
    N = instance.N
    f = recovery_loss(instance)
    g = l1_term(lam1, N * N) if lam1 > 0 else None
    domain = TraceBall(B=tau, symmetric=symmetric, spectral=spectral or SpectralConfig())
    if schedule is None:
        schedule = default_schedule(tau, 1.0, recovery_lg(instance, lam1) if lam1 > 0 else None)
    report = hcgs_solve(f, g, identity_map() if g is not None else None, domain, schedule,
                        config, x1=x1, shape=(N, N), monitor=monitor)
    if lam2 is not None:
        report.info["J_final"] = recovery_objective_J(report.final_point, instance, lam1, lam2)
    return report


# ---------------------------------------------------------------------------
# Sparse PCA


@dataclass(frozen=True)
class SpcaInstance:
    C: np.ndarray
    planted: np.ndarray
    lam: float = 1.0
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.C.shape[0]


def gen_spca_instance(n: int, seed: int = 0, lam: float = 1.0) -> SpcaInstance:
    """``C = U U^T + 10 v v^T`` with ``U`` uniform [0, 1] and ``v`` uniform
    [0, 1] keeping ``ceil(n/10)`` nonzeros."""
    if n < 10:
        raise InvalidParameterError("n must be >= 10")
    rng = np.random.default_rng(seed)
    U = rng.uniform(size=(n, n))
    v = rng.uniform(size=n)
    keep = math.ceil(0.1 * n)
    v[rng.permutation(n)[keep:]] = 0.0
    C = U @ U.T + 10.0 * np.outer(v, v)
    C = 0.5 * (C + C.T)
    return SpcaInstance(C, v, lam, dict(n=n, seed=seed, lam=lam))


def spca_value(X, instance: SpcaInstance) -> float:
    """``<C, X> - lam ||X||_1``, the quantity being maximized."""
    return float(np.vdot(instance.C, X)) - instance.lam * float(np.sum(np.abs(X)))


def planted_overlap(X, instance: SpcaInstance) -> float:
    """``|cos|`` between the dominant eigenvector of ``X`` and the planted vector."""
    _, vecs = np.linalg.eigh(0.5 * (X + X.T))
    v = instance.planted / np.linalg.norm(instance.planted)
    return abs(float(vecs[:, -1] @ v))


def solve_spca_hcgs(instance: SpcaInstance, config: SolverConfig | None = None, *,
                    schedule: Schedule | None = None,
                    spectral: SpectralConfig | None = None, x1=None,
                    monitor=None) -> SolveReport:
    """Maximize ``<C, X> - lam ||X||_1`` over the spectrahedron.

    Internally minimizes ``-(<C, X> - lam ||X||_1) / n``; the division by
    ``n`` brings the l1 term's Lipschitz constant down to ``lam``. The
    returned trace is mapped back to the maximized, unscaled value, which
    leaves relative changes untouched.
    """
    n = instance.n
    scale = 1.0 / n
    f = linear_term(instance.C, scale=-scale)
    g = l1_term(instance.lam * scale, n * n) if instance.lam > 0 else None
    if schedule is None:
        schedule = default_schedule(1.0, 1.0, instance.lam if instance.lam > 0 else None)
    domain = Spectrahedron(spectral=spectral or SpectralConfig())
    report = hcgs_solve(f, g, identity_map() if g is not None else None, domain, schedule,
                        config, x1=x1, shape=(n, n), monitor=monitor)
    report.trace = [dataclasses.replace(r, objective=-r.objective * n,
                                        smoothed_objective=-r.smoothed_objective * n)
                    for r in report.trace]
    report.info["overlap"] = planted_overlap(report.final_point, instance)
    return report


# ---------------------------------------------------------------------------
# l1-constrained quadratic programs


class QuadraticTerm(SmoothTerm):
    """``1/2 <x, Q x> + <c, x>`` with ``Q x`` cached between steps.

    After ``advance`` the cache is updated from the nonzeros of ``y`` only,
    which costs one column of ``Q`` per nonzero when ``y`` is a vertex of an
    l1 ball.
    """

    def __init__(self, Q, c):
        self.Q = np.asarray(Q, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.holder_exponent = 1.0
        self.holder_const = float(np.linalg.norm(self.Q, 2))
        self._x = None
        self._Qx = None

    def _qx(self, x):
        if x is self._x:
            return self._Qx
        return self.Q @ x

    def value(self, x):
        return 0.5 * float(x @ self._qx(x)) + float(self.c @ x)

    def gradient(self, x):
        return self._qx(x) + self.c

    def start(self, x):
        nz = np.flatnonzero(x)
        self._Qx = self.Q[:, nz] @ x[nz]
        self._x = x

    def advance(self, x_next, y, alpha):
        nz = np.flatnonzero(y)
        self._Qx = (1.0 - alpha) * self._Qx + alpha * (self.Q[:, nz] @ y[nz])
        self._x = x_next


@dataclass(frozen=True)
class SparseQpInstance:
    Q: np.ndarray
    c: np.ndarray
    B: float
    penalty: LipschitzTerm | None = None
    A: LinearMap | None = None
    params: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.c.shape[0]

    def objective(self, x) -> float:
        val = 0.5 * float(x @ (self.Q @ x)) + float(self.c @ x)
        if self.penalty is not None:
            val += self.penalty.value(self.A.apply(x))
        return val


def gen_sparse_qp_instance(d: int, seed: int = 0, m: int | None = None, B: float = 1.0,
                           lam: float = 0.1, sparsity: int = 5) -> SparseQpInstance:
    """Least-squares QP ``1/2 ||M x - b||^2`` (constant dropped) with a fused
    penalty ``lam ||D x||_1`` on first differences, under ``||x||_1 <= B``.

    ``M`` is ``m x d`` Gaussian scaled by ``1/sqrt(m)``; ``b = M x0 + noise``
    for a ``sparsity``-sparse ``x0`` with ``||x0||_1 = B``. ``lam = 0``
    leaves the plain l1-constrained QP.
    """
    rng = np.random.default_rng(seed)
    m = m or max(d // 2, 1)
    M = rng.normal(size=(m, d)) / math.sqrt(m)
    x0 = np.zeros(d)
    support = rng.choice(d, size=min(sparsity, d), replace=False)
    x0[support] = rng.uniform(-1.0, 1.0, size=support.size)
    x0 *= B / np.sum(np.abs(x0))
    b = M @ x0 + 0.01 * rng.normal(size=m)
    Q = M.T @ M
    Q = 0.5 * (Q + Q.T)
    c = -M.T @ b
    params = dict(d=d, seed=seed, m=m, B=B, lam=lam, sparsity=sparsity)
    if lam > 0:
        return SparseQpInstance(Q, c, B, l1_term(lam, d - 1), difference_map(d), params)
    return SparseQpInstance(Q, c, B, None, None, params)


def solve_sparse_qp_hcgs(instance: SparseQpInstance, config: SolverConfig | None = None, *,
                         start_index: int | None = None,
                         schedule: Schedule | None = None,
                         monitor=None) -> SolveReport:
    """Hybrid method over the l1 ball with an incrementally updated gradient.

    Starts from ``B e_i`` (``i`` defaults to the index of the largest
    ``|c_i|``), so iterate ``x_k`` has at most ``k`` nonzeros. Each trace row
    carries ``nnz``.
    """
    d = instance.d
    B = instance.B
    i = int(np.argmax(np.abs(instance.c))) if start_index is None else start_index
    x1 = np.zeros(d)
    x1[i] = B
    f = QuadraticTerm(instance.Q, instance.c)
    g, A = instance.penalty, instance.A
    if schedule is None:
        if g is not None:
            schedule = default_schedule(B, A.norm_bound, g.lipschitz_const)
        else:
            schedule = default_schedule(B, 0.0)

    def nnz_monitor(k, x):
        row = {"nnz": int(np.count_nonzero(x))}
        if monitor is not None:
            row.update(monitor(k, x))
        return row

    return hcgs_solve(f, g, A, L1Ball(B), schedule, config, x1=x1, monitor=nnz_monitor)


# ---------------------------------------------------------------------------
# Serialization


def _write_manifest(path: Path, params: dict) -> None:
    with open(path, "w") as fh:
        for key, val in params.items():
            fh.write(f"{key}={val!r}\n" if isinstance(val, float) else f"{key}={val}\n")


def read_manifest(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def write_manifest(path, params: dict) -> None:
    _write_manifest(Path(path), params)


def save_instance(instance, directory) -> None:
    """Write an instance as MatrixMarket arrays plus ``manifest.txt``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    if isinstance(instance, RecoveryInstance):
        kind = "recovery"
        arrays = dict(ground_truth=instance.ground_truth, Y=instance.Y,
                      mask=instance.mask.observed_mask.astype(float))
    elif isinstance(instance, SpcaInstance):
        kind = "spca"
        arrays = dict(C=instance.C, planted=instance.planted[:, None])
    elif isinstance(instance, SparseQpInstance):
        kind = "qp"
        arrays = dict(Q=instance.Q, c=instance.c[:, None])
    else:
        raise TypeError(f"cannot serialize {type(instance).__name__}")
    for name, a in arrays.items():
        write_matrix_market(d / f"{name}.mtx", a)
    _write_manifest(d / "manifest.txt", dict(kind=kind, **instance.params))


def load_instance(directory):
    d = Path(directory)
    man = read_manifest(d / "manifest.txt")
    kind = man.pop("kind")
    params = {k: _parse_scalar(v) for k, v in man.items()}
    if kind == "recovery":
        mask = read_matrix_market(d / "mask.mtx") != 0
        return RecoveryInstance(read_matrix_market(d / "ground_truth.mtx"),
                                read_matrix_market(d / "Y.mtx"), SamplingMask(mask),
                                float(params["noise_variance"]), params)
    if kind == "spca":
        return SpcaInstance(read_matrix_market(d / "C.mtx"),
                            read_matrix_market(d / "planted.mtx")[:, 0],
                            float(params["lam"]), params)
    if kind == "qp":
        Q = read_matrix_market(d / "Q.mtx")
        c = read_matrix_market(d / "c.mtx")[:, 0]
        lam = float(params.get("lam", 0.0))
        n = c.shape[0]
        if lam > 0:
            return SparseQpInstance(Q, c, float(params["B"]), l1_term(lam, n - 1),
                                    difference_map(n), params)
        return SparseQpInstance(Q, c, float(params["B"]), None, None, params)
    raise ValueError(f"unknown instance kind {kind!r}")


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text
