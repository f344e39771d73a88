"""Mixed-invariant dynamics, invariant errors and log-linear error dynamics.

The vehicle and reference evolve as ``X' = X wedge(l) + wedge(r) X`` with
``l = lbar + ul`` and ``r = rbar + ur``.  The left-invariant error
``eta = X^-1 Xbar = exp(wedge(zeta))`` then obeys, exactly,

    zeta' = -ad(lbar) zeta + U(zeta) (ul + Ad(X^-1) ur)
"""
from dataclasses import dataclass, field

import numpy as np

from . import lie


@dataclass(frozen=True)
class ControlConfig:
    B: np.ndarray
    K: np.ndarray
    BK: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float).reshape(3, 3))
        object.__setattr__(self, "K", np.asarray(self.K, dtype=float).reshape(3, 3))
        object.__setattr__(self, "BK", self.B @ self.K)


def left_error(X, Xbar):
    return lie.inverse(X) @ Xbar


def right_error(X, Xbar):
    return Xbar @ lie.inverse(X)


def group_rhs(X, l, r):
    """Tangent X wedge(l) + wedge(r) X."""
    return np.asarray(X) @ lie.wedge(l) + lie.wedge(r) @ np.asarray(X)


def _mv(M, v):
    if M.ndim == 2 and np.ndim(v) == 1:
        return M @ v
    return (M @ np.asarray(v)[..., None])[..., 0]


def left_log_rhs(z, lbar, ul, ur, X):
    z = np.asarray(z, dtype=float)
    drive = np.asarray(ul, dtype=float) + _mv(lie.adjoint_group(lie.inverse(X)), ur)
    return -_mv(lie.adjoint_algebra(lbar), z) + _mv(lie.u_left(z), drive)


def right_log_rhs(z, rbar, ul, ur, X):
    z = np.asarray(z, dtype=float)
    drive = np.asarray(ur, dtype=float) + _mv(lie.adjoint_group(X), ul)
    return _mv(lie.adjoint_algebra(rbar), z) + _mv(lie.u_right(z), drive)


def closed_loop_matrix(lbar, cfg):
    """-ad(lbar) + BK, the linear part of the inverted closed loop."""
    return -lie.adjoint_algebra(lbar) + cfg.BK


def dynamic_inversion_control(z, cfg):
    """u = U^-1(z) B K z, which turns the error dynamics into (-ad(lbar) + BK) z + U w."""
    z = np.asarray(z, dtype=float)
    return _mv(lie.u_left_inv(z), _mv(cfg.BK, z))


def no_inversion_control(z, cfg):
    """Linear counterpart of the inversion law, u = U^-1(0) B K z = -B K z.

    Substituting gives (-ad(lbar) + BK) z - (U(z) + I) B K z + U(z) w, where
    the residual term vanishes to first order at z = 0.
    """
    return -_mv(cfg.BK, np.asarray(z, dtype=float))


def no_inversion_residual(z, cfg):
    """-(U(z) + I) B K z, the part of the closed loop the linear law leaves uncancelled."""
    z = np.asarray(z, dtype=float)
    return -_mv(lie.u_left(z) + np.eye(3), _mv(cfg.BK, z))
