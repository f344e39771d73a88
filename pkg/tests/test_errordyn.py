import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from loglinear import lie
from loglinear.errordyn import (
    ControlConfig,
    closed_loop_matrix,
    dynamic_inversion_control,
    group_rhs,
    left_error,
    left_log_rhs,
    no_inversion_control,
    no_inversion_residual,
    right_error,
    right_log_rhs,
)

small = st.floats(-1.5, 1.5, allow_nan=False)
zvec = st.tuples(small, small, st.floats(-2.5, 2.5)).map(np.array)


def random_pose(rng):
    return lie.exp_group(rng.uniform([-3, -3, -2.5], [3, 3, 2.5]))


def gains(rng):
    return ControlConfig(np.eye(3) + 0.1 * rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))


def test_errors_definitions(rng):
    X, Xb = random_pose(rng), random_pose(rng)
    np.testing.assert_allclose(left_error(X, X), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(right_error(X, X), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(left_error(np.eye(3), Xb), Xb)
    np.testing.assert_allclose(right_error(np.eye(3), Xb), Xb)
    np.testing.assert_allclose(X @ left_error(X, Xb), Xb, atol=1e-12)
    np.testing.assert_allclose(right_error(X, Xb) @ X, Xb, atol=1e-12)


def test_group_rhs_examples():
    np.testing.assert_allclose(group_rhs(np.eye(3), [1, 0, 0], [0, 0, 0]), lie.wedge([1, 0, 0]))
    np.testing.assert_allclose(group_rhs(lie.pose(1, 2, 0.3), [0, 0, 0], [0, 0, 0]), 0)


def test_group_affine(rng):
    l, r = rng.normal(size=3), rng.normal(size=3)

    def f(X):
        return group_rhs(X, l, r)

    for _ in range(100):
        A, B = random_pose(rng), random_pose(rng)
        np.testing.assert_allclose(f(A @ B), f(A) @ B + A @ f(B) - A @ f(np.eye(3)) @ B, atol=1e-10)


@given(zvec, zvec)
def test_left_rhs_unforced_is_linear(z, lb):
    X = lie.pose(0.3, -0.4, 0.2)
    np.testing.assert_allclose(left_log_rhs(z, lb, np.zeros(3), np.zeros(3), X),
                               -lie.adjoint_algebra(lb) @ z, atol=1e-12)


def test_left_rhs_at_origin():
    ul = np.array([0.3, -1.0, 0.2])
    np.testing.assert_allclose(left_log_rhs(np.zeros(3), [19, 0, 0.1], ul, np.zeros(3), np.eye(3)), -ul)


def test_right_rhs_at_origin():
    ur = np.array([0.3, -1.0, 0.2])
    np.testing.assert_allclose(right_log_rhs(np.zeros(3), [1, 0, 0.1], np.zeros(3), ur, np.eye(3)), -ur)
    z, rb = np.array([0.1, 0.2, 0.3]), np.array([0.5, -0.1, 0.4])
    np.testing.assert_allclose(right_log_rhs(z, rb, np.zeros(3), np.zeros(3), np.eye(3)),
                               lie.adjoint_algebra(rb) @ z, atol=1e-14)


def _exact_pose(X0, l, r, t):
    # X' = X l^ + r^ X with constant inputs has X(t) = e^{r^ t} X0 e^{l^ t}
    return expm(lie.wedge(r) * t) @ X0 @ expm(lie.wedge(l) * t)


@pytest.mark.parametrize("side", ["left", "right"])
def test_log_error_dynamics_are_exact(rng, side):
    lbar, rbar = np.array([2.0, 0.3, 0.5]), np.array([0.4, -0.2, 0.3])
    ul, ur = np.array([0.2, -0.5, 0.3]), np.array([-0.1, 0.4, -0.2])
    X0 = random_pose(rng)
    Xb0 = X0 @ lie.exp_group([0.3, -0.2, 0.4])
    if side == "right":
        Xb0 = lie.exp_group([0.3, -0.2, 0.4]) @ X0
    err = left_error if side == "left" else right_error

    def rhs(t, z):
        X = _exact_pose(X0, lbar + ul, rbar + ur, t)
        if side == "left":
            return left_log_rhs(z, lbar, ul, ur, X)
        return right_log_rhs(z, rbar, ul, ur, X)

    z0 = lie.log_group(err(X0, Xb0))
    T = 1.0
    sol = solve_ivp(rhs, (0, T), z0, rtol=1e-12, atol=1e-12, dense_output=True)
    for t in np.linspace(0, T, 6):
        X = _exact_pose(X0, lbar + ul, rbar + ur, t)
        Xb = _exact_pose(Xb0, lbar, rbar, t)
        np.testing.assert_allclose(lie.log_group(err(X, Xb)), sol.sol(t), atol=1e-8)


def test_eta_derivative_expansion(rng):
    # eta^-1 eta' two ways: product rule versus the exp(-ad) expansion
    for _ in range(20):
        X = random_pose(rng)
        z = rng.uniform(-1, 1, 3)
        Xb = X @ lie.exp_group(z)
        lbar, ul, ur = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        Xdot = group_rhs(X, lbar + ul, ur)
        Xbdot = group_rhs(Xb, lbar, np.zeros(3))
        eta = lie.inverse(X) @ Xb
        etadot = -lie.inverse(X) @ Xdot @ lie.inverse(X) @ Xb + lie.inverse(X) @ Xbdot
        direct = lie.vee(lie.inverse(eta) @ etadot, tol=1e-9)
        E = expm(-lie.adjoint_algebra(z))
        expansion = (np.eye(3) - E) @ lbar - E @ ul - E @ lie.adjoint_group(lie.inverse(X)) @ ur
        np.testing.assert_allclose(direct, expansion, atol=1e-10)


def test_dynamic_inversion_examples(rng):
    cfg = gains(rng)
    np.testing.assert_allclose(dynamic_inversion_control(np.zeros(3), cfg), 0)
    zero = ControlConfig(np.eye(3), np.zeros((3, 3)))
    np.testing.assert_allclose(dynamic_inversion_control(rng.normal(size=3), zero), 0)


@given(zvec, zvec, zvec)
def test_inversion_closed_loop_identity(z, lb, w):
    cfg = ControlConfig(np.eye(3), np.diag([-1.0, -2.0, -3.0]) + 0.2)
    X = lie.pose(1.0, 2.0, 0.3)
    u = dynamic_inversion_control(z, cfg)
    lhs = left_log_rhs(z, lb, u + w, np.zeros(3), X)
    rhs = closed_loop_matrix(lb, cfg) @ z + lie.u_left(z) @ w
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(lhs).max()))


@given(zvec, zvec, zvec)
def test_no_inversion_decomposition(z, lb, w):
    cfg = ControlConfig(np.eye(3), np.diag([-1.0, -2.0, -3.0]) + 0.2)
    X = lie.pose(-1.0, 0.5, -0.7)
    u = no_inversion_control(z, cfg)
    lhs = left_log_rhs(z, lb, u + w, np.zeros(3), X)
    rhs = closed_loop_matrix(lb, cfg) @ z + no_inversion_residual(z, cfg) + lie.u_left(z) @ w
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(lhs).max()))


def test_no_inversion_examples(rng):
    cfg = gains(rng)
    np.testing.assert_allclose(no_inversion_control(np.zeros(3), cfg), 0)
    zero = ControlConfig(np.eye(3), np.zeros((3, 3)))
    np.testing.assert_allclose(no_inversion_control(rng.normal(size=3), zero), 0)
    # matches the inversion law to first order: U(0)^-1 = -I
    z = 1e-6 * rng.normal(size=3)
    np.testing.assert_allclose(no_inversion_control(z, cfg), dynamic_inversion_control(z, cfg), atol=1e-11)


def test_residual_is_second_order(rng):
    cfg = gains(rng)
    d = rng.normal(size=3)
    r1 = np.linalg.norm(no_inversion_residual(1e-2 * d, cfg))
    r2 = np.linalg.norm(no_inversion_residual(5e-3 * d, cfg))
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_zero_input_log_linear_flow(rng):
    # zero input: log error follows exp(-ad(lbar) t) z0
    from loglinear.sim import integrate_group

    for _ in range(5):
        lbar = rng.uniform([-3, -1, -1], [3, 1, 1])
        z0 = rng.uniform(-0.5, 0.5, 3)
        Xb0 = random_pose(rng)
        X0 = Xb0 @ lie.inverse(lie.exp_group(z0))
        dt, T = 1e-2, 5.0
        Xs = integrate_group(X0, lambda t: lbar, T, dt)
        Xbs = integrate_group(Xb0, lambda t: lbar, T, dt)
        for k in range(0, len(Xs), 100):
            z = lie.log_group(left_error(Xs[k], Xbs[k]))
            np.testing.assert_allclose(z, expm(-lie.adjoint_algebra(lbar) * k * dt) @ z0, atol=1e-8)
