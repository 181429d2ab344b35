import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hcgs.errors import InvalidParameterError, SpectralNonConvergenceWarning
from hcgs.linalg import SpectralConfig
from hcgs.oracles import (L1Ball, L2Ball, PsdTraceBall, Spectrahedron, TraceBall,
                          difference_map, l1_term, linear_term, lmo_l1_ball, lmo_l2_ball,
                          lmo_psd_trace_ball, lmo_spectrahedron, lmo_trace_ball,
                          matrix_map, moreau_gradient, moreau_value, soft_threshold,
                          trace_norm, zero_map)
from reference import (grid_prox_abs, jacobi_eigh, jacobi_singular_values, l1_ball_vertices,
                       moreau_abs_brute)

small = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
vec = arrays(float, st.integers(1, 8), elements=small)
beta_st = st.floats(1e-3, 10.0)
TIGHT = SpectralConfig(tol=1e-10, max_iters=100000)


# --- soft thresholding and the l1 term -------------------------------------

@pytest.mark.parametrize("x", [-3.2, -0.5, 0.0, 0.3, 1.7])
def test_soft_threshold_matches_grid_prox(x):
    got = soft_threshold(np.array([x]), 0.8)[0]
    assert got == pytest.approx(grid_prox_abs(x, 0.8), abs=2e-4)


@given(vec, st.floats(0, 5))
def test_soft_threshold_shrinks_towards_zero(x, gamma):
    y = soft_threshold(x, gamma)
    assert np.all(np.abs(y) <= np.abs(x))
    assert np.all(y * x >= 0)
    np.testing.assert_allclose(np.abs(x - y), np.minimum(np.abs(x), gamma), atol=1e-12)


def test_soft_threshold_rejects_negative_gamma():
    with pytest.raises(InvalidParameterError):
        soft_threshold(np.ones(2), -0.1)


def test_l1_term_constants():
    g = l1_term(0.5, 16)
    assert g.lipschitz_const == pytest.approx(2.0)
    assert g.value(np.array([1.0, -2.0])) == pytest.approx(1.5)
    with pytest.raises(InvalidParameterError):
        l1_term(-1.0, 3)


# --- Moreau envelope --------------------------------------------------------

@settings(max_examples=200)
@given(vec, beta_st, st.floats(0.01, 3.0))
def test_moreau_sandwich(x, beta, lam):
    g = l1_term(lam, x.size)
    L = g.lipschitz_const
    gb, gx = moreau_value(g, beta, x), g.value(x)
    tol = 1e-10 * max(1.0, gx)
    assert gb <= gx + tol
    assert gx <= gb + 0.5 * beta * L**2 + tol


@settings(max_examples=200)
@given(vec, beta_st, beta_st, st.floats(0.01, 3.0))
def test_moreau_monotone_in_beta(x, b1, b2, lam):
    big, small_ = max(b1, b2), min(b1, b2)
    g = l1_term(lam, x.size)
    L = g.lipschitz_const
    e_big, e_small = moreau_value(g, big, x), moreau_value(g, small_, x)
    tol = 1e-10 * max(1.0, g.value(x))
    assert e_big <= e_small + tol
    assert e_small <= e_big + 0.5 * (big - small_) * L**2 + tol


@pytest.mark.parametrize("x,lam,beta", [(2.0, 1.0, 0.5), (0.3, 1.0, 1.0), (-4.0, 0.2, 3.0),
                                        (0.0, 2.0, 0.1)])
def test_moreau_value_matches_golden_section(x, lam, beta):
    g = l1_term(lam, 1)
    assert moreau_value(g, beta, np.array([x])) == pytest.approx(
        moreau_abs_brute(x, lam, beta), abs=1e-10)


@settings(max_examples=100)
@given(arrays(float, 5, elements=small), st.floats(0.05, 5.0))
def test_moreau_gradient_finite_differences(x, beta):
    g = l1_term(0.7, 5)
    h = 1e-6
    # keep every coordinate away from the kinks of the envelope's gradient
    assume(np.all(np.abs(np.abs(x) - beta * 0.7) > 1e-4))
    fd = np.array([(moreau_value(g, beta, x + h * e) - moreau_value(g, beta, x - h * e)) / (2 * h)
                   for e in np.eye(5)])
    grad = moreau_gradient(g, beta, x)
    assert np.linalg.norm(grad - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))


@given(vec, beta_st)
def test_moreau_gradient_is_bounded_by_lipschitz_constant(x, beta):
    g = l1_term(1.3, x.size)
    assert np.linalg.norm(moreau_gradient(g, beta, x)) <= g.lipschitz_const * (1 + 1e-12)


@pytest.mark.parametrize("beta", [0.0, -1.0])
def test_moreau_rejects_nonpositive_beta(beta):
    g = l1_term(1.0, 2)
    with pytest.raises(InvalidParameterError):
        moreau_value(g, beta, np.ones(2))
    with pytest.raises(InvalidParameterError):
        moreau_gradient(g, beta, np.ones(2))


# --- linear maps ------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 10, 57])
def test_difference_map_adjoint_and_norm(d):
    D = difference_map(d)
    rng = np.random.default_rng(d)
    x, y = rng.normal(size=d), rng.normal(size=d - 1)
    assert D.apply(x) @ y == pytest.approx(x @ D.adjoint(y))
    dense = np.diff(np.eye(d), axis=0)
    assert D.norm_bound == pytest.approx(np.linalg.norm(dense, 2), rel=1e-12)


def test_matrix_and_zero_maps():
    M = np.array([[1.0, 2.0], [0.0, 1.0], [3.0, -1.0]])
    A = matrix_map(M)
    x = np.array([1.0, -1.0])
    np.testing.assert_array_equal(A.apply(x), M @ x)
    assert A.norm_bound == pytest.approx(jacobi_singular_values(M)[0])
    Z = zero_map((2,), (3,))
    assert Z.norm_bound == 0.0 and not np.any(Z.apply(x)) and Z.adjoint(np.ones(3)).shape == (2,)


def test_linear_term():
    c = np.array([1.0, -2.0])
    f = linear_term(c, scale=-0.5)
    assert f.value(np.array([2.0, 1.0])) == pytest.approx(0.0)
    np.testing.assert_array_equal(f.gradient(np.zeros(2)), -0.5 * c)
    assert f.holder_const == 0.0


# --- LMOs -------------------------------------------------------------------

@given(arrays(float, st.integers(1, 7), elements=small), st.floats(0.1, 10))
def test_lmo_l1_ball_matches_vertex_enumeration(z, B):
    y = lmo_l1_ball(z, B)
    best = max(v @ z for v in l1_ball_vertices(z.size, B))
    assert y @ z == pytest.approx(best, abs=1e-12)
    assert np.count_nonzero(y) == 1 and np.sum(np.abs(y)) == pytest.approx(B)


def test_lmo_l1_ball_ties_and_zero():
    np.testing.assert_array_equal(lmo_l1_ball(np.zeros(3), 2.0), [2.0, 0, 0])
    np.testing.assert_array_equal(lmo_l1_ball(np.array([1.0, -3.0, 3.0]), 1.0), [0, -1.0, 0])


def test_lmo_l2_ball():
    z = np.array([3.0, 4.0])
    np.testing.assert_allclose(lmo_l2_ball(z, 2.0), [1.2, 1.6])
    assert np.linalg.norm(lmo_l2_ball(np.zeros(2), 2.0)) == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 3), elements=small), st.floats(0.1, 5))
def test_lmo_trace_ball_reaches_support_value(Z, B):
    s1 = jacobi_singular_values(Z)[0]
    assume(s1 > 1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectralNonConvergenceWarning)
        Y = lmo_trace_ball(Z, B, TIGHT)
    assert np.vdot(Y, Z) >= (1 - 1e-6) * B * s1
    assert trace_norm(Y) == pytest.approx(B, rel=1e-12)
    assert np.linalg.matrix_rank(Y) == 1


@settings(max_examples=50, deadline=None)
@given(arrays(float, (5, 5), elements=small))
def test_lmo_spectrahedron_matches_eigensolver(M):
    S = M + M.T
    w, _ = jacobi_eigh(S)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectralNonConvergenceWarning)
        P = lmo_spectrahedron(S, TIGHT)
    scale = max(1.0, float(np.max(np.abs(w))))
    assert np.vdot(P, S) >= w[-1] - 1e-6 * scale
    assert np.trace(P) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(P - P.T)) == 0.0


def test_lmo_psd_trace_ball_zero_when_negative_definite():
    S = -np.diag([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(lmo_psd_trace_ball(S, 2.0), np.zeros((3, 3)))
    P = lmo_psd_trace_ball(np.diag([1.0, -2.0]), 2.0)
    np.testing.assert_allclose(P, np.diag([2.0, 0.0]), atol=1e-6)


def test_lmo_warns_on_nonconvergence():
    Z = np.diag([1.0, 1.0 - 1e-9, 0.1])
    with pytest.warns(SpectralNonConvergenceWarning):
        lmo_trace_ball(Z, 1.0, SpectralConfig(tol=1e-14, max_iters=2))


# --- domains ----------------------------------------------------------------

def test_domain_residuals():
    assert L1Ball(1.0).residual(np.array([0.5, -0.5])) == 0.0
    assert L1Ball(1.0).residual(np.array([1.0, -1.0])) == pytest.approx(1.0)
    assert L2Ball(1.0).residual(np.array([3.0, 4.0])) == pytest.approx(4.0)
    assert TraceBall(B=1.0).residual(np.eye(2)) == pytest.approx(1.0)
    assert TraceBall(B=1.0, symmetric=True).residual(np.array([[0.0, 0.5], [0.0, 0.0]])) == 0.5
    assert Spectrahedron().residual(np.eye(3) / 3) == pytest.approx(0.0, abs=1e-15)
    assert Spectrahedron().residual(np.diag([1.5, -0.5])) == pytest.approx(0.5)
    assert PsdTraceBall(B=2.0).residual(np.eye(2)) == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_domains_reject_bad_radius(bad):
    for make in (L1Ball, L2Ball, lambda b: TraceBall(B=b), lambda b: PsdTraceBall(B=b)):
        with pytest.raises(InvalidParameterError):
            make(bad)


def test_symmetric_trace_ball_atoms_are_symmetric():
    rng = np.random.default_rng(3)
    dom = TraceBall(B=2.0, symmetric=True, spectral=TIGHT)
    for _ in range(20):
        Z = rng.normal(size=(6, 6))
        Y = dom.lmo(Z)
        assert np.array_equal(Y, Y.T)
        S = 0.5 * (Z + Z.T)
        w, _ = jacobi_eigh(S)
        assert np.vdot(Y, S) >= (1 - 1e-6) * 2.0 * max(abs(w[0]), abs(w[-1]))


def test_spectral_domain_warm_start_and_reset():
    rng = np.random.default_rng(4)
    dom = TraceBall(B=1.0)
    Z = rng.normal(size=(10, 10))
    dom.lmo(Z)
    assert dom._v is not None
    dom.reset()
    assert dom._v is None and dom.nonconverged == 0
    cold = TraceBall(B=1.0, warm_start=False)
    cold.lmo(Z)
    assert cold._v is None


def test_spectral_domain_counts_nonconvergence():
    dom = TraceBall(B=1.0, spectral=SpectralConfig(tol=1e-14, max_iters=2))
    with pytest.warns(SpectralNonConvergenceWarning):
        dom.lmo(np.diag([1.0, 1.0 - 1e-9]))
    assert dom.nonconverged == 1


def test_trace_norm_matches_jacobi():
    M = np.random.default_rng(5).normal(size=(5, 4))
    assert trace_norm(M) == pytest.approx(float(np.sum(jacobi_singular_values(M))), rel=1e-12)
    assert math.isclose(trace_norm(np.zeros((2, 2))), 0.0)
