"""First-order oracles: smooth terms, Lipschitz terms with their proximity
operators and Moreau envelopes, linear maps, and linear minimization oracles
over the bounded domains used by the solvers."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, SpectralNonConvergenceWarning
from .linalg import SpectralConfig, SpectralResult, dominant_eigpair, power_svd

# ---------------------------------------------------------------------------
# Terms


@dataclass
class SmoothTerm:
    """A differentiable term with Hölder continuous gradient.

    ``start`` and ``advance`` are called by the solvers at the initial point
    and after every convex-combination step ``x_next = (1-alpha) x + alpha y``.
    The base versions do nothing; subclasses use them to update a cached
    gradient incrementally.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    holder_exponent: float = 1.0
    holder_const: float = 0.0

    def start(self, x: np.ndarray) -> None:
        pass

    def advance(self, x_next: np.ndarray, y: np.ndarray, alpha: float) -> None:
        pass


@dataclass
class LipschitzTerm:
    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    lipschitz_const: float


@dataclass
class LinearMap:
    apply: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    norm_bound: float


def linear_term(c: np.ndarray, scale: float = 1.0) -> SmoothTerm:
    """``x -> scale * <c, x>``; constant gradient, so ``holder_const = 0``."""
    c = np.asarray(c, dtype=float)
    grad = scale * c
    return SmoothTerm(value=lambda x: scale * float(np.vdot(c, x)),
                      gradient=lambda x: grad,
                      holder_exponent=1.0, holder_const=0.0)


def soft_threshold(X, gamma: float) -> np.ndarray:
    """Entrywise ``sgn(x) * max(|x| - gamma, 0)``, the prox of ``gamma * ||.||_1``."""
    if gamma < 0:
        raise InvalidParameterError("soft_threshold needs gamma >= 0")
    X = np.asarray(X, dtype=float)
    return np.sign(X) * np.maximum(np.abs(X) - gamma, 0.0)


def l1_term(lam: float, dim: int) -> LipschitzTerm:
    """``lam * ||x||_1`` on a space of ``dim`` entries.

    The Lipschitz constant is taken in the Euclidean norm, ``lam * sqrt(dim)``.
    """
    if lam < 0:
        raise InvalidParameterError("lam must be nonnegative")
    return LipschitzTerm(
        value=lambda x: lam * float(np.sum(np.abs(x))),
        # resolved through the module namespace on purpose: selftest's
        # fault injection patches soft_threshold here
        prox=lambda x, beta: soft_threshold(x, beta * lam),
        lipschitz_const=lam * math.sqrt(dim),
    )


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise InvalidParameterError(f"smoothing parameter must be positive, got {beta}")


def moreau_value(g: LipschitzTerm, beta: float, x) -> float:
    _check_beta(beta)
    x = np.asarray(x, dtype=float)
    u = g.prox(x, beta)
    d = x - u
    return float(np.vdot(d, d)) / (2.0 * beta) + g.value(u)


def moreau_gradient(g: LipschitzTerm, beta: float, x) -> np.ndarray:
    _check_beta(beta)
    x = np.asarray(x, dtype=float)
    return (x - g.prox(x, beta)) / beta


def identity_map() -> LinearMap:
    return LinearMap(apply=lambda x: x, adjoint=lambda y: y, norm_bound=1.0)


def zero_map(in_shape, out_shape) -> LinearMap:
    return LinearMap(apply=lambda x: np.zeros(out_shape),
                     adjoint=lambda y: np.zeros(in_shape),
                     norm_bound=0.0)


def matrix_map(M) -> LinearMap:
    M = np.asarray(M, dtype=float)
    return LinearMap(apply=lambda x: M @ x, adjoint=lambda y: M.T @ y,
                     norm_bound=float(np.linalg.norm(M, 2)))


def difference_map(d: int) -> LinearMap:
    """First differences ``x[i+1] - x[i]`` on R^d, applied in O(d)."""

    def adjoint(y):
        out = np.zeros(d)
        out[:-1] -= y
        out[1:] += y
        return out

    # ||D||^2 = 2 - 2 cos(pi (d-1) / d) < 4
    return LinearMap(apply=np.diff, adjoint=adjoint,
                     norm_bound=math.sqrt(2.0 - 2.0 * math.cos(math.pi * (d - 1) / d)))


# ---------------------------------------------------------------------------
# Linear minimization oracles (maximize <y, z> over the domain)


def lmo_l1_ball(z, B: float) -> np.ndarray:
    """``B sgn(z_j) e_j`` with ``j`` the first index maximizing ``|z_j|``.

    A zero direction returns ``B e_1``.
    """
    if not B > 0:
        raise InvalidParameterError("B must be positive")
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    j = int(np.argmax(np.abs(flat)))
    y = np.zeros_like(flat)
    y[j] = -B if flat[j] < 0 else B
    return y.reshape(z.shape)


def lmo_l2_ball(z, rho: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    nz = np.linalg.norm(z)
    if nz == 0.0:
        y = np.zeros_like(z).ravel()
        y[0] = rho
        return y.reshape(z.shape)
    return rho * z / nz


def _warn_if_unconverged(res: SpectralResult, what: str) -> None:
    if not res.converged:
        warnings.warn(f"{what}: power iteration stopped after {res.iterations_used} "
                      "iterations without reaching tolerance",
                      SpectralNonConvergenceWarning, stacklevel=3)


def _unit(x):
    return x / np.linalg.norm(x)


def _trace_ball_atom(Z, B, cfg: SpectralConfig, v0=None):
    res = power_svd(Z, tol=cfg.tol, max_iters=cfg.max_iters, seed=cfg.seed, v0=v0)
    Y = B * np.outer(_unit(res.left), _unit(res.right))
    return Y, res


def _symmetric_trace_ball_atom(Z, B, cfg: SpectralConfig, v0=None):
    S = 0.5 * (Z + Z.T)
    res = power_svd(S, tol=cfg.tol, max_iters=cfg.max_iters, seed=cfg.seed, v0=v0)
    w = _unit(res.right)
    sign = -1.0 if float(w @ (S @ w)) < 0 else 1.0
    return sign * B * np.outer(w, w), res


def _spectrahedron_atom(Z, cfg: SpectralConfig, v0=None):
    res = dominant_eigpair(Z, tol=cfg.tol, max_iters=cfg.max_iters, seed=cfg.seed, v0=v0)
    u = _unit(res.right)
    return np.outer(u, u), res


def lmo_trace_ball(Z, B: float, spectral: SpectralConfig | None = None) -> np.ndarray:
    """Rank-one ``B u v^T`` from the dominant singular pair of ``Z``.

    Exact unit vectors keep ``||Y||_tr = B`` whatever the power-iteration
    tolerance. Emits :class:`SpectralNonConvergenceWarning` when the power
    iteration runs out of iterations.
    """
    if not B > 0:
        raise InvalidParameterError("B must be positive")
    Y, res = _trace_ball_atom(np.asarray(Z, dtype=float), B, spectral or SpectralConfig())
    _warn_if_unconverged(res, "lmo_trace_ball")
    return Y


def lmo_spectrahedron(Z, spectral: SpectralConfig | None = None) -> np.ndarray:
    Y, res = _spectrahedron_atom(np.asarray(Z, dtype=float), spectral or SpectralConfig())
    _warn_if_unconverged(res, "lmo_spectrahedron")
    return Y


def lmo_psd_trace_ball(Z, B: float, spectral: SpectralConfig | None = None) -> np.ndarray:
    """``B u u^T`` for the signed-max eigenvector when ``lambda_max(Z) > 0``,
    otherwise the zero matrix."""
    if not B > 0:
        raise InvalidParameterError("B must be positive")
    P, res = _spectrahedron_atom(np.asarray(Z, dtype=float), spectral or SpectralConfig())
    _warn_if_unconverged(res, "lmo_psd_trace_ball")
    if res.value <= 0:
        return np.zeros_like(P)
    return B * P


# ---------------------------------------------------------------------------
# Domains


def _asymmetry(X) -> float:
    return float(np.max(np.abs(X - X.T))) if X.size else 0.0


def trace_norm(X) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)))


class BoundedDomain:
    """Bounded convex set accessed through its linear minimization oracle.

    ``lmo(z)`` returns a point ``y`` of the set maximizing ``<y, z>``;
    ``residual(x)`` is zero for feasible points and grows with the violation;
    ``radius`` bounds the Euclidean (Frobenius) norm of every feasible point.
    ``reset`` clears warm-start state and is called at the start of a solve.
    """

    radius: float = 1.0

    def lmo(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def residual(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def reset(self) -> None:
        pass


class L1Ball(BoundedDomain):
    def __init__(self, B: float):
        if not B > 0:
            raise InvalidParameterError("B must be positive")
        self.B = float(B)
        self.radius = self.B

    def lmo(self, z):
        return lmo_l1_ball(z, self.B)

    def residual(self, x):
        return max(0.0, float(np.sum(np.abs(x))) - self.B)


class L2Ball(BoundedDomain):
    def __init__(self, rho: float):
        if not rho > 0:
            raise InvalidParameterError("rho must be positive")
        self.radius = float(rho)

    def lmo(self, z):
        return lmo_l2_ball(z, self.radius)

    def residual(self, x):
        return max(0.0, float(np.linalg.norm(x)) - self.radius)


@dataclass(eq=False, kw_only=True)
class _SpectralDomain(BoundedDomain):
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    warm_start: bool = True

    def __post_init__(self):
        self._v = None
        self.nonconverged = 0

    def reset(self):
        self._v = None
        self.nonconverged = 0

    def _atom(self, Z, v0):
        raise NotImplementedError

    def lmo(self, Z):
        Y, res = self._atom(np.asarray(Z, dtype=float), self._v)
        if self.warm_start:
            self._v = res.right
        if not res.converged:
            self.nonconverged += 1
            _warn_if_unconverged(res, type(self).__name__)
        return Y


@dataclass(eq=False, kw_only=True)
class TraceBall(_SpectralDomain):
    """``{X : ||X||_tr <= B}``; with ``symmetric=True`` the ball intersected
    with the symmetric matrices, whose extreme points are ``+-B w w^T``."""

    B: float = 1.0
    symmetric: bool = False

    def __post_init__(self):
        super().__post_init__()
        if not self.B > 0:
            raise InvalidParameterError("B must be positive")
        self.radius = float(self.B)

    def _atom(self, Z, v0):
        if self.symmetric:
            return _symmetric_trace_ball_atom(Z, self.B, self.spectral, v0)
        return _trace_ball_atom(Z, self.B, self.spectral, v0)

    def residual(self, X):
        r = max(0.0, trace_norm(X) - self.B)
        if self.symmetric:
            r = max(r, _asymmetry(X))
        return r


@dataclass(eq=False, kw_only=True)
class Spectrahedron(_SpectralDomain):
    """``{X : X = X^T, X psd, trace X = 1}``."""

    def __post_init__(self):
        super().__post_init__()
        self.radius = 1.0

    def _atom(self, Z, v0):
        return _spectrahedron_atom(Z, self.spectral, v0)

    def residual(self, X):
        X = np.asarray(X, dtype=float)
        lam_min = float(np.linalg.eigvalsh(0.5 * (X + X.T))[0])
        return max(abs(float(np.trace(X)) - 1.0), max(0.0, -lam_min), _asymmetry(X))


@dataclass(eq=False, kw_only=True)
class PsdTraceBall(_SpectralDomain):
    """``{X : X psd, trace X <= B}``, the trace-norm ball restricted to the
    positive semidefinite cone."""

    B: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not self.B > 0:
            raise InvalidParameterError("B must be positive")
        self.radius = float(self.B)

    def _atom(self, Z, v0):
        P, res = _spectrahedron_atom(Z, self.spectral, v0)
        if res.value <= 0:
            return np.zeros_like(P), res
        return self.B * P, res

    def residual(self, X):
        X = np.asarray(X, dtype=float)
        lam_min = float(np.linalg.eigvalsh(0.5 * (X + X.T))[0])
        return max(max(0.0, float(np.trace(X)) - self.B), max(0.0, -lam_min), _asymmetry(X))
