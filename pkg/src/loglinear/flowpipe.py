"""Flow pipes around a reference trajectory and obstacle verification.

The vehicle pose is ``X = Xbar exp(-z)`` with ``z`` in the invariant
ellipsoid, so its position is ``pbar + R(thetabar) s`` where ``s`` ranges over
the translation part of ``exp(z)`` (the ellipsoid is symmetric).  Over a time
window, ``pbar`` lies in the reference interval hull and ``thetabar`` in its
heading range, which gives ``box + sweep(S)`` as an enclosing polygon.
"""
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import lie
from .errors import AngleWrap
from .geometry import (
    ConvexPolygon, convex_hull, minkowski_sum, polygons_intersect, rectangle, regular_polygon, sweep_rotation,
)
from .trajectory import interval_hull

log = logging.getLogger(__name__)

N_DIRS = 256
N_SLICES = 65
SWEEP_STEPS = 32
DILATION = 1.01
WINDOW = 0.5
POINT_RADIUS = 1e-9


def _slice_points(E, n_dirs, n_slices):
    """Circumscribed polygons of every heading slice of the ellipsoid, mapped by exp.

    For fixed heading t the slice {(x, y) : [x, y, t] P [x, y, t]^T <= 1} is
    an ellipse, and the translation of exp is linear in (x, y) for fixed t,
    so each slice image is an ellipse enclosed by the image of a polygon
    circumscribed about the slice.
    """
    P = E.P
    Pinv = np.linalg.inv(P)
    ext = math.sqrt(Pinv[2, 2])
    if ext >= math.pi - lie.TAU_BRANCH:
        raise AngleWrap(f"heading extent {ext:.4f} rad leaves the log branch")
    Pxy = P[:2, :2]
    lam, V = np.linalg.eigh(Pxy)
    L = V / np.sqrt(lam)  # maps the unit circle onto {q : q^T Pxy q = 1}
    shift = -np.linalg.solve(Pxy, P[:2, 2])
    a = 2 * np.pi * np.arange(n_dirs) / n_dirs
    circle = np.column_stack([np.cos(a), np.sin(a)]) / math.cos(math.pi / n_dirs)
    # heading t = ext sin(phi) keeps neighbouring slices evenly spaced on the surface
    out = []
    for phi in np.linspace(-np.pi / 2, np.pi / 2, n_slices):
        t = ext * math.sin(phi)
        q = shift * t + math.cos(phi) * circle @ L.T
        z = np.column_stack([q, np.full(len(q), t)])
        out.append(lie.exp_group(z)[:, :2, 2])
    return np.concatenate(out), ext


def project_invariant_set(E, n_dirs=N_DIRS, n_slices=N_SLICES, dilation=DILATION):
    """Convex polygon enclosing the translations of exp(z) over the ellipsoid.

    A degenerate (point) ellipsoid yields a tiny polygon around the origin.
    """
    lam = np.linalg.eigvalsh(E.P)
    if lam.min() <= 0:
        raise ValueError("ellipsoid shape matrix must be positive definite")
    if 1.0 / math.sqrt(lam.min()) < POINT_RADIUS:
        return regular_polygon(POINT_RADIUS, 8)
    pts, ext = _slice_points(E, n_dirs, n_slices)
    hull = convex_hull(pts, allow_degenerate=True)
    # between slices each surface curve leaves its chord by at most h^2 max|c''| / 8;
    # the second difference estimates h^2 |c''|, doubled for safety
    per_slice = pts.reshape(n_slices, n_dirs, 2)
    gap = float(np.linalg.norm(np.diff(per_slice, n=2, axis=0), axis=-1).max()) / 4.0
    poly = hull.dilated(dilation)
    if gap > 0:
        poly = minkowski_sum(poly, regular_polygon(gap, 16))
    return poly


@dataclass
class FlowPipeSegment:
    t0: float
    t1: float
    polygon: ConvexPolygon

    def to_dict(self):
        return {"window": [float(self.t0), float(self.t1)], "polygon": self.polygon.to_list()}


@dataclass
class Obstacle:
    polygon: ConvexPolygon
    name: str = ""

    def __post_init__(self):
        if self.polygon.area() <= 0:
            raise ValueError("obstacle must have positive area")

    @classmethod
    def from_dict(cls, d):
        if "polygon" in d:
            poly = convex_hull(d["polygon"])
        else:
            poly = rectangle(d["xmin"], d["xmax"], d["ymin"], d["ymax"])
        return cls(poly, d.get("name", ""))

    def to_dict(self):
        return {"name": self.name, "polygon": self.polygon.to_list()}


def load_obstacles(path_or_list):
    data = path_or_list
    if isinstance(path_or_list, str):
        with open(path_or_list) as f:
            data = json.load(f)
    return [Obstacle.from_dict(d) for d in data]


def window_grid(t0, t1, window=WINDOW):
    n = max(1, int(math.ceil((t1 - t0) / window - 1e-9)))
    return np.linspace(t0, t1, n + 1)


def build_flow_pipe(traj, E, t_grid=None, window=WINDOW, n_dirs=N_DIRS, sweep_steps=SWEEP_STEPS,
                    hull_samples=20):
    """One segment per consecutive pair of ``t_grid`` knots."""
    if t_grid is None:
        t_grid = window_grid(traj.t0, traj.t1, window)
    body = project_invariant_set(E, n_dirs)
    segments = []
    for a, b in zip(t_grid[:-1], t_grid[1:]):
        box = interval_hull(traj, float(a), float(b), hull_samples)
        swept = sweep_rotation(body, box.heading_min, box.heading_max, sweep_steps)
        poly = minkowski_sum(rectangle(box.xmin, box.xmax, box.ymin, box.ymax), swept)
        segments.append(FlowPipeSegment(float(a), float(b), poly))
    return segments


def segment_index(pipe, t):
    """Index of every segment whose window contains time ``t``."""
    return [k for k, s in enumerate(pipe) if s.t0 - 1e-12 <= t <= s.t1 + 1e-12]


@dataclass
class SafetyReport:
    verdict: str
    collisions: list

    @property
    def safe(self):
        return self.verdict == "SAFE"

    def to_dict(self):
        return {"verdict": self.verdict, "collisions": self.collisions}

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def verify_safety(pipe, obstacles):
    """Separating-axis check of every (segment, obstacle) pair."""
    collisions = []
    for i, seg in enumerate(pipe):
        for j, obs in enumerate(obstacles):
            if polygons_intersect(seg.polygon, obs.polygon):
                collisions.append({"segment": i, "obstacle": j, "name": obs.name,
                                   "window": [float(seg.t0), float(seg.t1)]})
    verdict = "UNSAFE" if collisions else "SAFE"
    log.info("verification: %s (%d colliding pairs)", verdict, len(collisions))
    return SafetyReport(verdict, collisions)


def pipe_containment(pipe, t, positions):
    """Fraction of (time, run) position samples inside a segment covering that time.

    ``positions`` has shape (n_t, n_runs, 2).
    """
    positions = np.asarray(positions, dtype=float)
    inside = np.zeros(positions.shape[:2], dtype=bool)
    for k, tk in enumerate(t):
        for idx in segment_index(pipe, tk):
            inside[k] |= pipe[idx].polygon.contains(positions[k])
    return float(inside.mean()), inside
