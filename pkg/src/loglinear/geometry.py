"""Planar convex geometry: hulls, Minkowski sums, rotation sweeps and SAT."""
import math

import numpy as np

from .errors import Degenerate, SpanTooLarge

DUP_TOL = 1e-9


class ConvexPolygon:
    """Counter-clockwise vertex list; a single vertex is allowed (a point)."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) == 0:
            raise ValueError("polygon needs at least one vertex")
        self.vertices = v

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"ConvexPolygon({len(self)} vertices, area={self.area():.4g})"

    def area(self):
        if len(self) < 3:
            return 0.0
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def centroid(self):
        return self.vertices.mean(axis=0)

    def support(self, d):
        """h(d) = max_v <v, d>; ``d`` may be (2,) or (n, 2)."""
        return (np.asarray(d, dtype=float) @ self.vertices.T).max(axis=-1)

    def contains(self, pts, tol=1e-9):
        """Points inside or on the boundary (within ``tol``)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices
        if len(v) < 3:
            return np.zeros(len(pts), dtype=bool)
        e = np.roll(v, -1, axis=0) - v
        rel = pts[:, None, :] - v[None]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        scale = np.linalg.norm(e, axis=1)[None]
        return np.all(cross >= -tol * scale, axis=1)

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def is_convex_ccw(self, tol=1e-12):
        v = self.vertices
        if len(v) < 3:
            return True
        e = np.roll(v, -1, axis=0) - v
        f = np.roll(e, -1, axis=0)
        return bool(np.all(e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0] >= -tol))

    def rotated(self, angle, origin=(0.0, 0.0)):
        c, s = math.cos(angle), math.sin(angle)
        o = np.asarray(origin, dtype=float)
        return ConvexPolygon((self.vertices - o) @ np.array([[c, s], [-s, c]]) + o)

    def translated(self, offset):
        return ConvexPolygon(self.vertices + np.asarray(offset, dtype=float))

    def dilated(self, factor):
        """Scale about the vertex centroid."""
        c = self.centroid()
        return ConvexPolygon(c + factor * (self.vertices - c))

    def to_list(self):
        return [[float(x), float(y)] for x, y in self.vertices]


def rectangle(xmin, xmax, ymin, ymax):
    return ConvexPolygon([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])


def regular_polygon(radius, n=16, circumscribed=True):
    """Regular n-gon centred at the origin; circumscribed about the circle by default."""
    r = radius / math.cos(math.pi / n) if circumscribed else radius
    a = 2 * np.pi * np.arange(n) / n
    return ConvexPolygon(np.column_stack([r * np.cos(a), r * np.sin(a)]))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, allow_degenerate=False):
    """Andrew's monotone chain; returns a CCW ConvexPolygon without collinear vertices.

    Raises Degenerate when the points do not span an area, unless
    ``allow_degenerate`` (then a point or segment polygon is returned).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    uniq = np.unique(pts, axis=0)
    if len(uniq) < 3:
        if allow_degenerate:
            return ConvexPolygon(uniq)
        raise Degenerate("fewer than three distinct points")
    P = uniq.tolist()  # np.unique sorts lexicographically

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(P)
    upper = chain(reversed(P))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        if allow_degenerate:
            return ConvexPolygon(hull)
        raise Degenerate("points are collinear")
    return ConvexPolygon(hull)


def _start_lowest(v):
    k = np.lexsort((v[:, 0], v[:, 1]))[0]
    return np.roll(v, -k, axis=0)


def minkowski_sum(a, b):
    """Edge-merge Minkowski sum of two convex CCW polygons."""
    A = _start_lowest(a.vertices)
    B = _start_lowest(b.vertices)
    if len(A) == 1 or len(B) == 1:
        return ConvexPolygon((A if len(B) == 1 else B) + (B[0] if len(B) == 1 else A[0]))
    ea = np.roll(A, -1, axis=0) - A
    eb = np.roll(B, -1, axis=0) - B
    out = [A[0] + B[0]]
    i = j = 0
    na, nb = len(A), len(B)
    while i < na or j < nb:
        if i == na:
            step = eb[j]
            j += 1
        elif j == nb:
            step = ea[i]
            i += 1
        else:
            c = ea[i][0] * eb[j][1] - ea[i][1] * eb[j][0]
            if c > 0:
                step = ea[i]
                i += 1
            elif c < 0:
                step = eb[j]
                j += 1
            else:
                step = ea[i] + eb[j]
                i += 1
                j += 1
        out.append(out[-1] + step)
    out = np.array(out[:-1])
    # drop collinear / repeated vertices
    return convex_hull(out, allow_degenerate=True)


def sweep_rotation(poly, theta_min, theta_max, n_steps=32, n_disk=16):
    """Hull of ``poly`` rotated about the origin over [theta_min, theta_max].

    Rotations are taken at n_steps + 1 evenly spaced angles; the arc traced
    between neighbouring samples by a vertex at radius r deviates from the
    chord by less than r * dtheta / 2, which is added as a polygonal disk.
    """
    if theta_min > theta_max:
        raise ValueError("theta_min must not exceed theta_max")
    span = theta_max - theta_min
    if span >= math.pi:
        raise SpanTooLarge(f"rotation span {span:.4f} rad is not below pi")
    if span == 0.0:
        return poly.rotated(theta_min)
    angles = np.linspace(theta_min, theta_max, n_steps + 1)
    v = poly.vertices
    pts = []
    for a in angles:
        c, s = math.cos(a), math.sin(a)
        pts.append(v @ np.array([[c, s], [-s, c]]))
    hull = convex_hull(np.concatenate(pts), allow_degenerate=True)
    r = float(np.linalg.norm(v, axis=1).max())
    pad = r * (span / n_steps) / 2.0
    if pad == 0.0:
        return hull
    return minkowski_sum(hull, regular_polygon(pad, n_disk))


def _axes(poly):
    v = poly.vertices
    if len(v) == 1:
        return np.zeros((0, 2))
    e = np.roll(v, -1, axis=0) - v
    if len(v) == 2:
        e = e[:1]
    n = np.column_stack([-e[:, 1], e[:, 0]])
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def polygons_intersect(a, b, tol=0.0):
    """Separating-axis test; touching polygons count as intersecting."""
    axes = np.concatenate([_axes(a), _axes(b)])
    if len(axes) == 0:
        return bool(np.allclose(a.vertices[0], b.vertices[0]))
    pa = a.vertices @ axes.T
    pb = b.vertices @ axes.T
    separated = (pa.max(axis=0) < pb.min(axis=0) - tol) | (pb.max(axis=0) < pa.min(axis=0) - tol)
    return not bool(np.any(separated))
