"""Invariant ellipsoids for polytopic linear systems with bounded disturbance.

For every vertex ``A_i`` we require

    [[A_i^T P + P A_i + alpha P,  rho P],
     [rho P,                     -alpha I]]  <= 0

which makes ``{z : z^T P z <= 1}`` invariant for ``z' = A(t) z + d`` with
``||d||_2 <= rho``.  The volume of the ellipsoid is minimised by maximising
``log det P``.  The problem has six unknowns, so a dense log-barrier Newton
method is used instead of a general SDP package.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible

log = logging.getLogger(__name__)

ALPHA_RANGE = (1e-3, 10.0)
P_CAP = 1e8
LMI_TOL = 1e-8

# basis of symmetric 3x3 matrices, ordered (00, 11, 22, 01, 02, 12)
_IDX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_SYM_BASIS = np.zeros((6, 3, 3))
for _k, (_i, _j) in enumerate(_IDX):
    _SYM_BASIS[_k, _i, _j] = _SYM_BASIS[_k, _j, _i] = 1.0


def sym_from_vec(p):
    return np.tensordot(np.asarray(p, dtype=float), _SYM_BASIS, axes=1)


def vec_from_sym(P):
    P = np.asarray(P, dtype=float)
    return np.array([P[i, j] for i, j in _IDX])


def vertex_lmi(A, P, alpha, rho):
    """The 6x6 block matrix that must be negative semidefinite."""
    A = np.asarray(A, dtype=float)
    top = A.T @ P + P @ A + alpha * P
    return np.block([[top, rho * P], [rho * P, -alpha * np.eye(3)]])


def lmi_residual(vertices, P, alpha, rho):
    """Largest eigenvalue over all vertex LMIs (<= 0 means satisfied)."""
    return max(np.linalg.eigvalsh(vertex_lmi(A, P, alpha, rho)).max() for A in vertices)


# ---------------------------------------------------------------------------
# dense barrier machinery
#
# Constraints are grouped by block size.  A group is (F0, F, w) with F0 of
# shape (b, m, m), F of shape (n, b, m, m) and weights w of shape (b,); it
# requires F0[j] + sum_k x_k F[k, j] > 0 for every j.


def _group_values(group, x):
    F0, F, w = group
    return F0 + np.tensordot(x, F, axes=1)


def _barrier_derivs(groups, x):
    n = len(x)
    g = np.zeros(n)
    H = np.zeros((n, n))
    for group in groups:
        F0, F, w = group
        Minv = np.linalg.inv(_group_values(group, x))
        G = Minv[None] @ F  # (n, b, m, m)
        g -= np.einsum("j,kjaa->k", w, G)
        H += np.einsum("j,kjab,ljba->kl", w, G, G)
    return g, H


def _feasible(groups, x):
    for group in groups:
        try:
            np.linalg.cholesky(_group_values(group, x))
        except np.linalg.LinAlgError:
            return False
    return True


def _centre(groups, c, t, x, max_newton=100, tol=1e-12):
    """Minimise t c^T x + barrier(x) from a strictly feasible x.

    The barrier is self-concordant, so the damped step 1/(1 + lambda) keeps
    iterates feasible and decreases the objective without a line search on
    function values (which are dominated by roundoff once t is large).
    """
    for _ in range(max_newton):
        g, H = _barrier_derivs(groups, x)
        g = t * c + g
        try:
            dx = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(H, g, rcond=None)[0]
        lam2 = max(-(g @ dx), 0.0)
        if lam2 <= tol:
            break
        lam = math.sqrt(lam2)
        s = 1.0 if lam < 0.25 else 1.0 / (1.0 + lam)
        while not _feasible(groups, x + s * dx):
            s *= 0.5
            if s < 1e-14:
                return x
        x = x + s * dx
    return x


def _barrier_solve(groups, c, x0, gap_tol=1e-10, mu=20.0, t0=1.0, stop=None):
    """Path-following on t; ``stop(x)`` allows early exit (phase I)."""
    m = sum(float(np.sum(gr[2])) * gr[0].shape[1] for gr in groups)
    x, t = np.asarray(x0, dtype=float), t0
    while True:
        x = _centre(groups, c, t, x)
        if stop is not None and stop(x):
            return x
        if m / t < gap_tol:
            return x
        t *= mu


# ---------------------------------------------------------------------------


@dataclass
class InvariantEllipsoid:
    """``{z : z^T P z <= 1}`` with the decay rate and disturbance level it certifies."""

    P: np.ndarray
    alpha: float
    rho: float
    sigma: float = 1.0
    history: list = field(default_factory=list)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        self.P = 0.5 * (P + P.T)

    @property
    def shape_inverse(self):
        return np.linalg.inv(self.P)

    def semi_axes(self):
        return 1.0 / np.sqrt(np.linalg.eigvalsh(self.P))

    def geometric_mean_axis(self):
        return float(np.exp(np.mean(np.log(self.semi_axes()))))

    def extents(self):
        """Half-widths of the axis-aligned bounding box."""
        return np.sqrt(np.diag(self.shape_inverse))

    def contains(self, z, tol=0.0):
        z = np.asarray(z, dtype=float)
        return np.einsum("...i,ij,...j->...", z, self.P, z) <= 1.0 + tol

    def boundary(self, directions):
        """Map unit vectors (n, 3) onto the boundary via P^(-1/2)."""
        lam, V = np.linalg.eigh(self.P)
        root_inv = (V / np.sqrt(lam)) @ V.T
        return np.asarray(directions, dtype=float) @ root_inv.T

    def to_dict(self):
        return {
            "P": [float(v) for v in self.P.reshape(-1)],
            "alpha": float(self.alpha),
            "rho": float(self.rho),
            "sigma": float(self.sigma),
            "semi_axes": [float(v) for v in self.semi_axes()],
            "sigma_history": [float(v) for v in self.history],
        }


def _lmi_group(vertices, alpha, rho):
    """The vertex LMIs as one group over the six entries of P."""
    F = np.array([[-vertex_lmi(A, E, alpha, rho) for A in vertices] for E in _SYM_BASIS])
    F[:, :, 3:, 3:] = 0.0
    F0 = np.zeros((len(vertices), 6, 6))
    F0[:, 3:, 3:] = alpha * np.eye(3)
    return F0, F, np.ones(len(vertices))


def _strictly_feasible(vertices, P, alpha, rho, p_cap):
    if not np.all(np.linalg.eigvalsh(P) > 0) or np.linalg.eigvalsh(P).max() >= p_cap:
        return False
    return lmi_residual(vertices, P, alpha, rho) < 0


def _phase_one(vertices, alpha, rho):
    """Strictly feasible P for a fixed alpha, or None.

    Minimises s subject to -M_i(P) + s I > 0, P + s I > 0 and tr P < 1;
    any s < 0 yields a strictly feasible P.
    """
    F0, F, w = _lmi_group(vertices, alpha, rho)
    eye6 = np.broadcast_to(np.eye(6), F0.shape)[None]
    g_lmi = (F0, np.concatenate([F, eye6], axis=0), w)
    g_pos = (np.zeros((1, 3, 3)), np.concatenate([_SYM_BASIS, np.eye(3)[None]], axis=0)[:, None], np.ones(1))
    tr = np.zeros((7, 1, 1, 1))
    tr[:3] = -1.0
    g_tr = (np.ones((1, 1, 1)), tr, np.ones(1))
    groups = [g_lmi, g_pos, g_tr]
    x0 = np.zeros(7)
    x0[:3] = 1.0 / 6.0
    worst = lmi_residual(vertices, sym_from_vec(x0[:6]), alpha, rho)
    x0[6] = max(worst, 0.0) + 1.0
    c = np.zeros(7)
    c[6] = 1.0
    margin = 1e-9
    x = _barrier_solve(groups, c, x0, stop=lambda x: x[6] < -margin)
    if x[6] < -margin:
        return sym_from_vec(x[:6])
    return None


def solve_fixed_alpha(vertices, alpha, rho, p_cap=P_CAP, gap_tol=1e-10, start=None):
    """Maximise log det P for a fixed decay rate; returns (P, log det P) or None.

    ``start`` is an optional warm start, used when strictly feasible.
    """
    if start is not None and _strictly_feasible(vertices, start, alpha, rho, p_cap):
        P0 = start
    else:
        P0 = _phase_one(vertices, alpha, rho)
    if P0 is None:
        return None
    g_lmi = _lmi_group(vertices, alpha, rho)
    # -log det P is carried as extra weight on the P > 0 barrier
    box = (np.stack([np.zeros((3, 3)), p_cap * np.eye(3)]),
           np.stack([_SYM_BASIS, -_SYM_BASIS], axis=1), np.ones(2))
    m = 6 * len(vertices) + 6
    x, t = vec_from_sym(P0), 1.0
    while True:
        box = (box[0], box[1], np.array([1.0 + t, 1.0]))
        x = _centre([g_lmi, box], np.zeros(6), 1.0, x)
        if m / t < gap_tol:
            break
        t *= 20.0
    P = sym_from_vec(x)
    return P, float(np.linalg.slogdet(P)[1])


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def invariant_ellipsoid(vertices, rho, alpha_range=ALPHA_RANGE, p_cap=P_CAP, n_grid=13, log_alpha_tol=1e-3):
    """Minimal-volume invariant ellipsoid over all vertices for disturbance level ``rho``.

    ``vertices`` is a sequence of 3x3 matrices or an object with a
    ``vertices`` attribute.  The decay rate is located by a log-spaced scan
    followed by golden-section refinement on log(alpha).
    """
    vertices = [np.asarray(A, dtype=float) for A in getattr(vertices, "vertices", vertices)]
    if rho < 0:
        raise ValueError("rho must be non-negative")
    lo, hi = (math.log(a) for a in alpha_range)
    cache = {}
    last = [None]

    def score(la):
        if la not in cache:
            start = None if last[0] is None else 0.5 * last[0]
            res = solve_fixed_alpha(vertices, math.exp(la), rho, p_cap, start=start)
            cache[la] = res
            if res is not None:
                last[0] = res[0]
        res = cache[la]
        return -np.inf if res is None else res[1]

    grid = np.linspace(lo, hi, n_grid)
    scores = np.array([score(la) for la in grid])
    if not np.isfinite(scores).any():
        raise Infeasible(f"no decay rate in {alpha_range} admits a feasible ellipsoid (rho={rho:g})")
    k = int(np.argmax(scores))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = score(x1), score(x2)
    while b - a > log_alpha_tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLD * (b - a)
            f1 = score(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLD * (b - a)
            f2 = score(x2)
    best = max(cache, key=lambda la: -np.inf if cache[la] is None else cache[la][1])
    P, logdet = cache[best]
    alpha = math.exp(best)
    log.debug("invariant ellipsoid: alpha=%.5g log det P=%.6g", alpha, logdet)
    return InvariantEllipsoid(P, alpha, rho)
