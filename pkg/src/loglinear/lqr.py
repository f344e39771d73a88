"""Continuous-time LQR via Kleinman-Newton iteration on Lyapunov equations."""
import logging

import numpy as np

from .errors import NoConvergence, NotStabilizable

log = logging.getLogger(__name__)

MAX_SEED_EXP = 10
RESIDUAL_TOL = 1e-9


def is_hurwitz(A):
    return bool(np.max(np.linalg.eigvals(A).real) < 0)


def lyap_solve(A, Q):
    """Solve A^T P + P A + Q = 0 by Kronecker vectorisation."""
    n = A.shape[0]
    I = np.eye(n)
    L = np.kron(I, A.T) + np.kron(A.T, I)
    P = np.linalg.solve(L, -Q.reshape(-1)).reshape(n, n)
    return 0.5 * (P + P.T)


def care_residual(A, B, Q, R, P):
    return np.linalg.norm(A.T @ P + P @ A - P @ B @ np.linalg.solve(R, B.T @ P) + Q)


def _seed_gain(A, B):
    for e in range(-1, MAX_SEED_EXP + 1):
        c = 0.0 if e < 0 else 2.0**e
        K = -c * B.T
        if is_hurwitz(A + B @ K):
            return K
    raise NotStabilizable("no stabilising seed gain -c B^T for c <= 2^10")


def care_solve(A, B, Q, R, max_iter=100, tol=RESIDUAL_TOL):
    """Stabilising solution of A^T P + P A - P B R^-1 B^T P + Q = 0."""
    A, B, Q, R = (np.asarray(M, dtype=float) for M in (A, B, Q, R))
    K = _seed_gain(A, B)
    P = np.zeros_like(A)
    for it in range(max_iter):
        Acl = A + B @ K
        P_new = lyap_solve(Acl, Q + K.T @ R @ K)
        K = -np.linalg.solve(R, B.T @ P_new)
        step = np.linalg.norm(P_new - P)
        P = P_new
        if care_residual(A, B, Q, R, P) <= tol and step <= max(tol, 1e-12 * np.linalg.norm(P)):
            log.debug("Kleinman-Newton converged in %d iterations", it + 1)
            return P
    res = care_residual(A, B, Q, R, P)
    if res <= tol:
        return P
    raise NoConvergence(f"Riccati residual {res:.3g} after {max_iter} iterations")


def lqr_gain(A, B, Q, R):
    """K = -R^-1 B^T P so that A + B K is Hurwitz."""
    P = care_solve(A, B, Q, R)
    return -np.linalg.solve(np.asarray(R, dtype=float), np.asarray(B, dtype=float).T @ P)
