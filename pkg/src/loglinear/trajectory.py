"""Minimum-snap polynomial references and flat-output conversion to SE(2)."""
import json
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DegenerateVelocity, IllConditioned, LogLinearError

DEGREE = 7
N_COEFF = DEGREE + 1
SNAP = 4
CONTINUITY = 4
V_MIN = 0.1
MAX_COND = 1e12


def _deriv_row(s, m):
    """d^m/ds^m of [1, s, ..., s^7] at s."""
    row = np.zeros(N_COEFF)
    for j in range(m, N_COEFF):
        row[j] = factorial(j) / factorial(j - m) * s ** (j - m)
    return row


def _snap_gram():
    Q = np.zeros((N_COEFF, N_COEFF))
    for i in range(SNAP, N_COEFF):
        for j in range(SNAP, N_COEFF):
            ci = factorial(i) / factorial(i - SNAP)
            cj = factorial(j) / factorial(j - SNAP)
            Q[i, j] = ci * cj / (i + j - 2 * SNAP + 1)
    return Q


_GRAM = _snap_gram()


@dataclass
class ReferenceTrajectory:
    """Piecewise degree-7 curve; segment k uses s = (t - knots[k]) / T_k in [0, 1].

    ``coeffs`` has shape (n_segments, 8, 2): power-basis coefficients in s for x and y.
    """

    knots: np.ndarray
    coeffs: np.ndarray
    stationarity_residual: float = 0.0

    @property
    def t0(self):
        return float(self.knots[0])

    @property
    def t1(self):
        return float(self.knots[-1])

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 2)
        T = self.knots[k + 1] - self.knots[k]
        return k, (t - self.knots[k]) / T, T

    def derivative(self, t, m=0):
        """m-th time derivative of (x, y); shape (..., 2)."""
        k, s, T = self._locate(t)
        c = self.coeffs[k]
        out = np.zeros(np.shape(s) + (2,))
        for j in range(m, N_COEFF)[::-1]:
            out = out * s[..., None] + (factorial(j) / factorial(j - m)) * c[..., j, :]
        return out / (T ** m)[..., None]

    def position(self, t):
        return self.derivative(t, 0)

    def snap_cost(self):
        T = np.diff(self.knots)
        return float(sum(
            np.einsum("ia,ij,ja->", self.coeffs[k], _GRAM, self.coeffs[k]) / T[k] ** (2 * SNAP - 1)
            for k in range(len(T))
        ))

    def speed_range(self, n=2000):
        t = np.linspace(self.t0, self.t1, n)
        v = np.linalg.norm(self.derivative(t, 1), axis=-1)
        return float(v.min()), float(v.max())

    def sample(self, n):
        t = np.linspace(self.t0, self.t1, n)
        return t, self.position(t)

    def to_csv(self, path, n=501):
        t, p = self.sample(n)
        v = self.derivative(t, 1)
        rows = ["t,x,y,vx,vy"]
        rows += [f"{a!r},{b!r},{c!r},{d!r},{e!r}" for a, (b, c), (d, e) in zip(t, p, v)]
        with open(path, "w") as f:
            f.write("\n".join(rows) + "\n")


def load_waypoints(path):
    with open(path) as f:
        data = json.load(f)
    return [(float(w["x"]), float(w["y"]), float(w["t"])) for w in data]


def plan_polynomial(waypoints, start=None, end=None):
    """Minimum-snap trajectory through ``waypoints`` [(x, y, t), ...].

    ``start`` / ``end`` list boundary derivatives of order 1, 2, 3 as (x, y)
    pairs; ``None`` entries are left free.  Both default to all zeros.
    Interior knots are C^4.  Solved as a single KKT system.
    """
    wp = np.asarray([(w["x"], w["y"], w["t"]) if isinstance(w, dict) else w for w in waypoints], dtype=float)
    if wp.ndim != 2 or wp.shape[0] < 2 or wp.shape[1] != 3:
        raise ValueError("need at least two (x, y, t) waypoints")
    times = wp[:, 2]
    if np.any(np.diff(times) <= 0):
        raise ValueError("waypoint times must be strictly increasing")
    start = [(0.0, 0.0)] * 3 if start is None else list(start) + [None] * (3 - len(start))
    end = [(0.0, 0.0)] * 3 if end is None else list(end) + [None] * (3 - len(end))

    n_seg = len(wp) - 1
    T = np.diff(times)
    Tref = float(T.mean())
    n_var = n_seg * N_COEFF

    rows, rhs = [], []

    def add(row, value):
        rows.append(row)
        rhs.append(np.asarray(value, dtype=float))

    for k in range(n_seg):
        for s, p in ((0.0, wp[k, :2]), (1.0, wp[k + 1, :2])):
            r = np.zeros(n_var)
            r[k * N_COEFF:(k + 1) * N_COEFF] = _deriv_row(s, 0)
            add(r, p)
    for k in range(1, n_seg):
        for m in range(1, CONTINUITY + 1):
            r = np.zeros(n_var)
            r[(k - 1) * N_COEFF:k * N_COEFF] = _deriv_row(1.0, m) * (Tref / T[k - 1]) ** m
            r[k * N_COEFF:(k + 1) * N_COEFF] = -_deriv_row(0.0, m) * (Tref / T[k]) ** m
            add(r, (0.0, 0.0))
    for m, val in enumerate(start, start=1):
        if val is not None:
            r = np.zeros(n_var)
            r[:N_COEFF] = _deriv_row(0.0, m) * (Tref / T[0]) ** m
            add(r, np.asarray(val) * Tref**m)
    for m, val in enumerate(end, start=1):
        if val is not None:
            r = np.zeros(n_var)
            r[-N_COEFF:] = _deriv_row(1.0, m) * (Tref / T[-1]) ** m
            add(r, np.asarray(val) * Tref**m)

    A = np.array(rows)
    b = np.array(rhs)
    H = np.zeros((n_var, n_var))
    for k in range(n_seg):
        sl = slice(k * N_COEFF, (k + 1) * N_COEFF)
        H[sl, sl] = _GRAM * (Tref / T[k]) ** (2 * SNAP - 1)
    n_con = A.shape[0]
    kkt = np.block([[H, A.T], [A, np.zeros((n_con, n_con))]])
    cond = np.linalg.cond(kkt)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise IllConditioned(f"KKT condition number {cond:.3g}")
    sol = np.linalg.solve(kkt, np.vstack([np.zeros((n_var, 2)), b]))
    c, lam = sol[:n_var], sol[n_var:]
    grad = H @ c
    resid = np.linalg.norm(grad + A.T @ lam) / max(1.0, np.linalg.norm(grad), np.linalg.norm(A.T @ lam))
    return ReferenceTrajectory(times.copy(), c.reshape(n_seg, N_COEFF, 2), float(resid))


def flat_outputs(traj, t, v_min=V_MIN):
    """Reference pose and body-frame input (v, 0, omega) at time t."""
    v = np.asarray(traj.derivative(t, 1), dtype=float)
    a = np.asarray(traj.derivative(t, 2), dtype=float)
    p = np.asarray(traj.position(t), dtype=float)
    sp2 = v[..., 0] ** 2 + v[..., 1] ** 2
    speed = np.sqrt(sp2)
    if np.any(speed <= v_min):
        raise DegenerateVelocity(f"reference speed {float(np.min(speed)):.3g} <= {v_min}")
    theta = np.arctan2(v[..., 1], v[..., 0])
    omega = (v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]) / sp2
    c, s = np.cos(theta), np.sin(theta)
    X = np.zeros(np.shape(theta) + (3, 3))
    X[..., 0, 0], X[..., 0, 1], X[..., 0, 2] = c, -s, p[..., 0]
    X[..., 1, 0], X[..., 1, 1], X[..., 1, 2] = s, c, p[..., 1]
    X[..., 2, 2] = 1.0
    lbar = np.stack([speed, np.zeros_like(speed), omega], axis=-1)
    return X, lbar


def check_input_box(traj, vx_range, omega_range, n=2000):
    """Raise if the reference input leaves the polytope box used for synthesis."""
    t = np.linspace(traj.t0, traj.t1, n)
    _, lbar = flat_outputs(traj, t)
    lo, hi = lbar[:, 0].min(), lbar[:, 0].max()
    wlo, whi = lbar[:, 2].min(), lbar[:, 2].max()
    if lo < vx_range[0] or hi > vx_range[1] or wlo < omega_range[0] or whi > omega_range[1]:
        raise LogLinearError(
            f"reference input outside box: speed [{lo:.3f}, {hi:.3f}], turn rate [{wlo:.3f}, {whi:.3f}]"
        )


@dataclass(frozen=True)
class IntervalHull:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    heading_min: float
    heading_max: float

    def corners(self):
        return np.array([
            [self.xmin, self.ymin], [self.xmax, self.ymin],
            [self.xmax, self.ymax], [self.xmin, self.ymax],
        ])


def interval_hull(traj, t0, t1, n_samples=20, inflate=True):
    """Axis-aligned box of reference positions and heading range over [t0, t1].

    Sample-based; with ``inflate`` the box grows by v_max * dt_sample and the
    heading range by omega_max * dt_sample to cover motion between samples.
    """
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    t = np.linspace(t0, t1, n_samples + 1)
    p = np.asarray(traj.position(t))
    v = np.asarray(traj.derivative(t, 1))
    a = np.asarray(traj.derivative(t, 2))
    heading = np.unwrap(np.arctan2(v[:, 1], v[:, 0]))
    sp2 = (v**2).sum(axis=1)
    omega = (v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]) / sp2
    h = (t1 - t0) / n_samples
    dp = dth = 0.0
    if inflate:
        dp = np.sqrt(sp2).max() * h
        dth = np.abs(omega).max() * h
    return IntervalHull(
        float(p[:, 0].min() - dp), float(p[:, 0].max() + dp),
        float(p[:, 1].min() - dp), float(p[:, 1].max() + dp),
        float(heading.min() - dth), float(heading.max() + dth),
    )


@dataclass
class ConstantReference:
    """Reference with constant body input; used by tests and quick runs."""

    lbar: np.ndarray
    Xbar0: np.ndarray = None

    def __post_init__(self):
        self.lbar = np.asarray(self.lbar, dtype=float)
        if self.Xbar0 is None:
            self.Xbar0 = np.eye(3)

    def initial_pose(self, t0=0.0):
        return np.asarray(self.Xbar0, dtype=float)

    def input(self, t):
        return np.broadcast_to(self.lbar, np.shape(t) + (3,))


@dataclass
class PolynomialReference:
    """Adapter exposing a planned trajectory as (initial pose, body input) to the simulator."""

    traj: ReferenceTrajectory

    def initial_pose(self, t0=None):
        return flat_outputs(self.traj, self.traj.t0 if t0 is None else t0)[0]

    def input(self, t):
        return flat_outputs(self.traj, t)[1]
