"""Dense linear algebra substrate: dominant singular triples, signed-max
eigenpairs by power iteration, and dense matrix I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class SpectralResult:
    left: np.ndarray
    right: np.ndarray
    value: float
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class SpectralConfig:
    """Knobs for the power iterations used inside linear minimization oracles.

    ``max_iters=None`` means ``10 * dim + 200``.
    """

    tol: float = DEFAULT_TOL
    max_iters: int | None = None
    seed: int = 0


def default_max_iters(dim: int) -> int:
    return 10 * dim + 200


def _unit(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def random_unit(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=dim)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        x = np.zeros(dim)
        x[0] = 1.0
        return x
    return x / nx


def power_svd(Z, tol: float = DEFAULT_TOL, max_iters: int | None = None,
              seed: int = 0, v0: np.ndarray | None = None) -> SpectralResult:
    """Dominant singular triple ``(u, sigma, v)`` of ``Z`` by alternating
    power iteration.

    Each sweep sets ``u = Z v / |Z v|`` (so ``Z v = sigma u`` holds exactly)
    and stops once ``|Z^T u - sigma v| <= tol * sigma``. ``v0`` overrides the
    seeded random start, which lets callers warm-start from a previous
    solution.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise ValueError("power_svd expects a 2-D array")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, n = Z.shape
    if max_iters is None:
        max_iters = default_max_iters(max(m, n))

    if v0 is not None and np.linalg.norm(v0) > 0:
        v = _unit(np.asarray(v0, dtype=float))
    else:
        v = random_unit(n, seed)

    if not np.any(Z):
        u = np.zeros(m)
        u[0] = 1.0
        return SpectralResult(u, v, 0.0, 0, True)

    u = np.zeros(m)
    sigma = 0.0
    for it in range(1, max_iters + 1):
        w = Z @ v
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            # v in the null space; restart from a fresh direction
            v = random_unit(n, seed + it)
            continue
        u = w / sigma
        t = Z.T @ u
        res = np.linalg.norm(t - sigma * v)
        nt = np.linalg.norm(t)
        v = t / nt
        if res <= tol * sigma:
            # keep Z v = sigma u consistent with the returned v
            w = Z @ v
            sigma = float(np.linalg.norm(w))
            u = w / sigma
            return SpectralResult(u, v, sigma, it, True)
    return SpectralResult(u, v, sigma, max_iters, False)


def gershgorin_shift(Z: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(Z), axis=1)))


def dominant_eigpair(Z, tol: float = DEFAULT_TOL, max_iters: int | None = None,
                     seed: int = 0, v0: np.ndarray | None = None) -> SpectralResult:
    """Eigenpair of the largest (signed) eigenvalue of a symmetric matrix.

    Power iteration runs on ``S + c I`` with ``c`` the Gershgorin row-sum bound,
    which makes the shifted matrix positive semidefinite so the iteration
    targets the algebraically largest eigenvalue rather than the largest in
    magnitude. ``left`` and ``right`` hold the same vector.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("dominant_eigpair expects a square matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = Z.shape[0]
    S = 0.5 * (Z + Z.T)
    if max_iters is None:
        max_iters = default_max_iters(n)

    if v0 is not None and np.linalg.norm(v0) > 0:
        x = _unit(np.asarray(v0, dtype=float))
    else:
        x = random_unit(n, seed)

    c = gershgorin_shift(S)
    if c == 0.0:
        return SpectralResult(x, x, 0.0, 0, True)

    mu = 0.0
    for it in range(1, max_iters + 1):
        w = S @ x + c * x
        mu = float(x @ w)
        res = np.linalg.norm(w - mu * x)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            x = random_unit(n, seed + it)
            continue
        if res <= tol * mu:
            lam = float(x @ (S @ x))
            return SpectralResult(x, x, lam, it, True)
        x = w / nw
    lam = float(x @ (S @ x))
    return SpectralResult(x, x, lam, max_iters, False)


# ---------------------------------------------------------------------------
# I/O


def _check_finite(a: np.ndarray, source) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite entries in {source}")
    return a


def write_matrix_market(path, a) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    _check_finite(a, "matrix to write")
    scipy.io.mmwrite(str(path), a, precision=17)


def read_matrix_market(path) -> np.ndarray:
    a = scipy.io.mmread(str(path))
    if hasattr(a, "toarray"):
        raise ValueError(f"{path}: expected dense array format, got coordinate")
    return _check_finite(np.asarray(a, dtype=float), path)


def write_csv(path, a) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    _check_finite(a, "matrix to write")
    np.savetxt(path, a, delimiter=",", fmt="%.17g")


def read_csv(path) -> np.ndarray:
    a = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return _check_finite(a, path)


def read_matrix(path) -> np.ndarray:
    if Path(path).suffix == ".mtx":
        return read_matrix_market(path)
    return read_csv(path)


def write_matrix(path, a) -> None:
    if Path(path).suffix == ".mtx":
        write_matrix_market(path, a)
    else:
        write_csv(path, a)
