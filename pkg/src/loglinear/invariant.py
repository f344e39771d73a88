"""Distortion-aware invariant sets for the log-linear tracking error.

With dynamic inversion the error obeys ``z' = (-ad(lbar) + BK) z + U(z) w``.
Over a box of reference inputs the linear part is a polytope, and the
disturbance term is bounded by ``sigma * ||w||`` where ``sigma`` is the
largest singular value of ``U`` over the invariant set itself.  The
fixed-point iteration below alternates between the ellipsoid and that bound.
"""
import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import lie
from .errordyn import dynamic_inversion_control, no_inversion_residual
from .errors import AngleWrap, NoConvergence
from .lmi import InvariantEllipsoid, invariant_ellipsoid

log = logging.getLogger(__name__)

N_SAMP = 2000
MARGIN = 1.02
MAX_ITER = 50

# R2 low-discrepancy sequence constants (plastic number)
_PLASTIC = 1.324717957244746
_R2 = (1.0 / _PLASTIC, 1.0 / _PLASTIC**2)


@dataclass
class PolytopicSystem:
    """Vertices ``A_i = -ad(lbar_i) + BK`` and per-channel disturbance bounds."""

    vertices: list
    w_bounds: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inputs: list = field(default_factory=list)

    def __post_init__(self):
        self.vertices = [np.asarray(A, dtype=float).reshape(3, 3) for A in self.vertices]
        self.w_bounds = np.asarray(self.w_bounds, dtype=float).reshape(3)
        if np.any(self.w_bounds < 0):
            raise ValueError("disturbance bounds must be non-negative")

    @property
    def w_norm(self):
        return float(np.linalg.norm(self.w_bounds))

    @property
    def disturbance_matrix(self):
        return np.eye(3)


def box_vertices(vx_range, vy_range=(0.0, 0.0), omega_range=(0.0, 0.0)):
    """All distinct corners of the reference-input box."""
    corners = []
    for c in itertools.product(*(sorted(set(map(float, r))) for r in (vx_range, vy_range, omega_range))):
        corners.append(np.array(c))
    return corners


def polytope_from_box(cfg, vx_range, vy_range=(0.0, 0.0), omega_range=(0.0, 0.0), w_bounds=(0.0, 0.0, 0.0)):
    inputs = box_vertices(vx_range, vy_range, omega_range)
    verts = [-lie.adjoint_algebra(l) + cfg.BK for l in inputs]
    return PolytopicSystem(verts, w_bounds, inputs)


def sphere_points(n):
    """First ``n`` points of a nested area-uniform sequence on the unit sphere.

    Point k does not depend on n, so the sample set for n is a prefix of the
    one for any larger n and sampled maxima are nondecreasing in n.
    """
    k = np.arange(n) + 0.5
    u = np.mod(k * _R2[0], 1.0)
    v = np.mod(k * _R2[1], 1.0)
    zc = 1.0 - 2.0 * u
    r = np.sqrt(np.maximum(0.0, 1.0 - zc * zc))
    phi = 2.0 * np.pi * v
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), zc])


def _check_angle(E, tau=lie.TAU_BRANCH):
    ext = float(np.sqrt(E.shape_inverse[2, 2]))
    if ext >= np.pi - tau:
        raise AngleWrap(f"heading extent {ext:.4f} rad leaves the log branch")
    return ext


def boundary_samples(E, n_samp=N_SAMP):
    _check_angle(E)
    return E.boundary(sphere_points(n_samp))


def sigma_max_over_ellipsoid(E, n_samp=N_SAMP, margin=MARGIN):
    """Sampled largest singular value of U over the ellipsoid boundary, times ``margin``."""
    zs = boundary_samples(E, n_samp)
    sv = np.linalg.svd(lie.u_left(zs), compute_uv=False)
    return margin * float(sv[:, 0].max())


def residual_bound(E, cfg, n_samp=N_SAMP, margin=MARGIN):
    """``margin * max ||(U(z) + I) B K z||`` over boundary samples."""
    zs = boundary_samples(E, n_samp)
    return margin * float(np.linalg.norm(no_inversion_residual(zs, cfg), axis=-1).max())


@dataclass
class SaturationBox:
    """Per-channel bounds on the inversion control over an ellipsoid."""

    bounds: np.ndarray

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(3)

    def contains(self, u, tol=0.0):
        return np.all(np.abs(np.asarray(u)) <= self.bounds + tol, axis=-1)

    def to_dict(self):
        return {"u_max": [float(b) for b in self.bounds]}


def saturation_box(E, cfg, n_samp=N_SAMP, margin=MARGIN):
    """Component-wise bounds of ``U^-1(z) B K z`` over the ellipsoid boundary."""
    zs = boundary_samples(E, n_samp)
    u = dynamic_inversion_control(zs, cfg)
    return SaturationBox(margin * np.abs(u).max(axis=0))


def _iterate(sys, rho_of, bounds_of, x0, eps, max_iter, **lmi_kw):
    """Shared fixed-point loop on the bound vector ``x``.

    Exit requires every component within ``eps`` of its recomputed value and
    no smaller than it.  Components that are close but below are nudged up
    by eps/2 so the next pass can certify over-approximation.
    """
    x = np.asarray(x0, dtype=float)
    history = []
    for it in range(1, max_iter + 1):
        E = invariant_ellipsoid(sys.vertices, rho_of(x), **lmi_kw)
        new = np.asarray(bounds_of(E), dtype=float)
        history.append((x.copy(), new.copy()))
        log.info("iteration %d: guess %s computed %s", it, x, new)
        close = np.all(np.abs(x - new) < eps)
        if close and np.all(x >= new):
            return E, x, history
        x = np.where(x < new, new + 0.5 * eps, new) if close else new
    raise NoConvergence(f"bound iteration did not settle in {max_iter} iterations")


@dataclass
class IterationResult:
    ellipsoid: InvariantEllipsoid
    sigma: float
    beta: float = 0.0
    history: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.history)

    def to_dict(self):
        d = self.ellipsoid.to_dict()
        d.update({
            "sigma_final": float(self.sigma),
            "beta_final": float(self.beta),
            "iterations": self.iterations,
            "sigma_history": [float(h[0][0]) for h in self.history],
            "sigma_max_history": [float(h[1][0]) for h in self.history],
        })
        return d

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def algorithm1(sys, w_bounds=None, sigma0=MARGIN, eps=1e-3, max_iter=MAX_ITER, n_samp=N_SAMP, **lmi_kw):
    """Fixed point of sigma -> sigma_max(ellipsoid(sigma * ||w||)).

    Returns an IterationResult whose ``sigma`` is the certified bound
    (>= the sampled maximum on the returned ellipsoid).
    """
    if sigma0 < 1:
        raise ValueError("sigma0 must be at least 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    wn = sys.w_norm if w_bounds is None else float(np.linalg.norm(w_bounds))
    if wn == 0.0:
        E = invariant_ellipsoid(sys.vertices, 0.0, **lmi_kw)
        s = sigma_max_over_ellipsoid(E, n_samp)
        E.sigma, E.history = s, [s]
        return IterationResult(E, s, 0.0, [(np.array([sigma0]), np.array([s]))])

    E, x, hist = _iterate(
        sys,
        lambda x: x[0] * wn,
        lambda E: [sigma_max_over_ellipsoid(E, n_samp)],
        [sigma0], eps, max_iter, **lmi_kw,
    )
    E.sigma = float(x[0])
    E.history = [float(h[0][0]) for h in hist]
    return IterationResult(E, float(x[0]), 0.0, hist)


def no_inversion_ellipsoid(sys, w_bounds=None, cfg=None, sigma0=MARGIN, eps=1e-3, max_iter=MAX_ITER,
                           n_samp=N_SAMP, **lmi_kw):
    """Invariant set for the linear law ``u = -BKz``.

    The uncancelled term ``-(U + I) B K z`` is treated as a further bounded
    input of size ``beta``, so the LMI level is ``sigma ||w|| + beta``.
    """
    wn = sys.w_norm if w_bounds is None else float(np.linalg.norm(w_bounds))

    def bounds(E):
        b = 0.0 if cfg is None else residual_bound(E, cfg, n_samp)
        return [sigma_max_over_ellipsoid(E, n_samp), b]

    E, x, hist = _iterate(sys, lambda x: x[0] * wn + x[1], bounds, [sigma0, 0.0], eps, max_iter, **lmi_kw)
    E.sigma = float(x[0])
    E.history = [float(h[0][0]) for h in hist]
    return IterationResult(E, float(x[0]), float(x[1]), hist)


def axis_ratio(with_inv, without_inv):
    """Ratio of geometric-mean semi-axes (no inversion over inversion)."""
    return without_inv.geometric_mean_axis() / with_inv.geometric_mean_axis()
