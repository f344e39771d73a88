import numpy as np
import pytest
from scipy.linalg import solve_continuous_are

from loglinear import lie
from loglinear.errors import NotStabilizable
from loglinear.lqr import care_residual, care_solve, is_hurwitz, lqr_gain, lyap_solve

I3 = np.eye(3)


def test_scalar_examples():
    np.testing.assert_allclose(care_solve(-I3, I3, I3, I3), (np.sqrt(2) - 1) * I3, atol=1e-12)
    np.testing.assert_allclose(care_solve(np.zeros((3, 3)), I3, I3, I3), I3, atol=1e-12)
    np.testing.assert_allclose(lqr_gain(-I3, I3, I3, I3), -(np.sqrt(2) - 1) * I3, atol=1e-12)


def test_zero_state_cost_with_hurwitz_a():
    A = np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 0.5], [0.0, 0.0, -0.5]])
    np.testing.assert_allclose(care_solve(A, I3, np.zeros((3, 3)), I3), 0.0, atol=1e-14)


def test_lyapunov_solution(rng):
    A = -2 * I3 + 0.3 * rng.normal(size=(3, 3))
    Q = np.diag([1.0, 2.0, 3.0])
    P = lyap_solve(A, Q)
    np.testing.assert_allclose(A.T @ P + P @ A + Q, 0.0, atol=1e-12)


@pytest.mark.parametrize("r", [0.003, 0.1, 1.0, 10.0])
def test_matches_scipy_on_se2_linearisation(r):
    A = -lie.adjoint_algebra([19.0, 0.0, 0.0])
    Q, R = I3, r * I3
    P = care_solve(A, I3, Q, R)
    ref = solve_continuous_are(A, I3, Q, R)
    np.testing.assert_allclose(P, ref, rtol=1e-8, atol=1e-10)
    assert care_residual(A, I3, Q, R, P) <= 1e-9
    assert np.linalg.eigvalsh(P).min() > 0


def test_random_systems_against_scipy(rng):
    for _ in range(20):
        A = rng.normal(size=(3, 3))
        B = rng.normal(size=(3, 3))
        Q = np.diag(rng.uniform(0.5, 2, 3))
        R = np.diag(rng.uniform(0.5, 2, 3))
        try:
            P = care_solve(A, B, Q, R)
        except NotStabilizable:
            continue
        np.testing.assert_allclose(P, solve_continuous_are(A, B, Q, R), rtol=1e-7, atol=1e-9)
        assert care_residual(A, B, Q, R, P) <= 1e-9


def test_gain_stabilises_every_vertex():
    B = I3
    K = lqr_gain(-lie.adjoint_algebra([19.0, 0.0, 0.0]), B, I3, 0.003 * I3)
    for vx in (18.0, 20.0):
        for w in (-np.pi / 2, np.pi / 2):
            A = -lie.adjoint_algebra([vx, 0.0, w]) + B @ K
            assert np.linalg.eigvals(A).real.max() < 0


def test_expensive_control_limit():
    A = -lie.adjoint_algebra([19.0, 0.0, 0.3])
    norms = [np.linalg.norm(lqr_gain(A, I3, I3, r * I3)) for r in (0.1, 1.0, 10.0, 100.0, 1e3)]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    # with A Hurwitz the gain vanishes in the limit
    A = -I3 + 0.2 * lie.adjoint_algebra([1.0, 0.5, 0.3])
    assert np.linalg.norm(lqr_gain(A, I3, I3, 1e6 * I3)) < 1e-5


def test_not_stabilizable():
    A = np.diag([1.0, -1.0, -1.0])
    B = np.diag([0.0, 1.0, 1.0])
    with pytest.raises(NotStabilizable):
        care_solve(A, B, I3, I3)


def test_is_hurwitz():
    assert is_hurwitz(-I3)
    assert not is_hurwitz(np.zeros((3, 3)))
