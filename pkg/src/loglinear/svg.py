"""Minimal static SVG figures (line charts and planar overlays)."""
import math

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H, PAD = 640, 420, 56


def _fmt(v):
    return f"{v:.3f}"


class Figure:
    """One panel with a data-to-pixel map fixed from the data bounds."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel="", equal=False, width=W, height=H):
        (x0, x1), (y0, y1) = xlim, ylim
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        self.w, self.h = width, height
        sx = (width - 2 * PAD) / (x1 - x0)
        sy = (height - 2 * PAD) / (y1 - y0)
        if equal:
            s = min(sx, sy)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1 = cx - (width - 2 * PAD) / s / 2, cx + (width - 2 * PAD) / s / 2
            y0, y1 = cy - (height - 2 * PAD) / s / 2, cy + (height - 2 * PAD) / s / 2
            sx = sy = s
        self.x0, self.x1, self.y0, self.y1, self.sx, self.sy = x0, x1, y0, y1, sx, sy
        self.items = []
        self.legend = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel

    def px(self, x, y):
        return PAD + (np.asarray(x) - self.x0) * self.sx, self.h - PAD - (np.asarray(y) - self.y0) * self.sy

    def _points(self, x, y):
        X, Y = self.px(x, y)
        return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(X, Y))

    def line(self, x, y, color=PALETTE[0], width=1.5, label=None, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{d} points="{self._points(x, y)}"/>')
        if label:
            self.legend.append((label, color))

    def polygon(self, verts, fill="none", stroke=PALETTE[0], opacity=1.0, label=None):
        v = np.asarray(verts, dtype=float)
        self.items.append(
            f'<polygon fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="1" '
            f'points="{self._points(v[:, 0], v[:, 1])}"/>')
        if label:
            self.legend.append((label, stroke if fill == "none" else fill))

    def _ticks(self, lo, hi, n=5):
        step = 10 ** math.floor(math.log10((hi - lo) / n))
        for m in (1, 2, 5, 10):
            if (hi - lo) / (step * m) <= n:
                step *= m
                break
        start = math.ceil(lo / step) * step
        return [start + k * step for k in range(int((hi - start) / step) + 1)]

    def render(self):
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
               f'viewBox="0 0 {self.w} {self.h}" font-family="sans-serif" font-size="11">',
               f'<rect width="{self.w}" height="{self.h}" fill="white"/>',
               f'<rect x="{PAD}" y="{PAD}" width="{self.w - 2 * PAD}" height="{self.h - 2 * PAD}" '
               f'fill="none" stroke="#444"/>']
        for t in self._ticks(self.x0, self.x1):
            X, _ = self.px(t, self.y0)
            out.append(f'<text x="{_fmt(X)}" y="{self.h - PAD + 14}" text-anchor="middle">{t:g}</text>')
        for t in self._ticks(self.y0, self.y1):
            _, Y = self.px(self.x0, t)
            out.append(f'<text x="{PAD - 4}" y="{_fmt(Y + 4)}" text-anchor="end">{t:g}</text>')
        out.append(f'<clipPath id="plot"><rect x="{PAD}" y="{PAD}" width="{self.w - 2 * PAD}" '
                   f'height="{self.h - 2 * PAD}"/></clipPath><g clip-path="url(#plot)">')
        out.extend(self.items)
        out.append("</g>")
        out.append(f'<text x="{self.w / 2}" y="{PAD / 2}" text-anchor="middle" font-size="13">{self.title}</text>')
        out.append(f'<text x="{self.w / 2}" y="{self.h - 12}" text-anchor="middle">{self.xlabel}</text>')
        out.append(f'<text x="14" y="{self.h / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {self.h / 2})">{self.ylabel}</text>')
        for k, (label, color) in enumerate(self.legend):
            y = PAD + 14 + 14 * k
            out.append(f'<line x1="{self.w - PAD - 120}" y1="{y - 4}" x2="{self.w - PAD - 100}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{self.w - PAD - 96}" y="{y}">{label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.render())


def stack(figures, path):
    """Write several panels one above the other into one SVG file."""
    height = sum(f.h for f in figures)
    width = max(f.w for f in figures)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">']
    y = 0
    for f in figures:
        parts.append(f'<g transform="translate(0 {y})">')
        parts.append(f.render().replace("url(#plot)", f"url(#plot{y})").replace('id="plot"', f'id="plot{y}"'))
        parts.append("</g>")
        y += f.h
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _limits(arrays, pad=0.05):
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    d = (hi - lo) * pad or 0.5
    return lo - d, hi + d


def time_series(t, columns, labels, title, ylabel, log=False):
    cols = [np.log10(np.maximum(np.abs(c), 1e-300)) if log else c for c in columns]
    fig = Figure(_limits([t], 0.0), _limits(cols), title, "t [s]", ("log10 " if log else "") + ylabel)
    for k, (c, lab) in enumerate(zip(cols, labels)):
        fig.line(t, c, PALETTE[k % len(PALETTE)], label=lab)
    return fig


def ellipse_outline(Pinv2, n=181):
    """Boundary of {q : q^T S^-1 q <= 1} for a 2x2 covariance-like S."""
    lam, V = np.linalg.eigh(Pinv2)
    a = np.linspace(0, 2 * np.pi, n)
    return (np.column_stack([np.cos(a), np.sin(a)]) * np.sqrt(np.maximum(lam, 0))) @ V.T


def ellipsoid_views(ellipsoids, labels, path):
    """Three coordinate-plane projections of one or more ellipsoids."""
    names = ("zeta_x", "zeta_y", "zeta_theta")
    figs = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        outs = [ellipse_outline(np.linalg.inv(E.P)[np.ix_([i, j], [i, j])]) for E in ellipsoids]
        lim = max(float(np.abs(o).max()) for o in outs) * 1.1
        fig = Figure((-lim, lim), (-lim, lim), f"{names[i]} / {names[j]}", names[i], names[j], equal=True)
        for k, (o, lab) in enumerate(zip(outs, labels)):
            fig.line(o[:, 0], o[:, 1], PALETTE[k], 2, label=lab)
        figs.append(fig)
    stack(figs, path)


def flowpipe_overlay(pipe, obstacles, path, reference=None, trajectories=None, title="flow pipe"):
    polys = [s.polygon.vertices for s in pipe] + [o.polygon.vertices for o in obstacles]
    pts = np.concatenate(polys) if polys else np.zeros((1, 2))
    fig = Figure(_limits([pts[:, 0]]), _limits([pts[:, 1]]), title, "x [m]", "y [m]", equal=True, width=900)
    for o in obstacles:
        fig.polygon(o.polygon.vertices, fill="#2ca02c", stroke="#1b6b1b", opacity=0.5)
    for s in pipe:
        fig.polygon(s.polygon.vertices, fill="#1f77b4", stroke="#1f77b4", opacity=0.15)
    if trajectories is not None:
        for tr in trajectories:
            fig.line(tr[:, 0], tr[:, 1], "#555555", 0.5)
    if reference is not None:
        fig.line(reference[:, 0], reference[:, 1], "#d62728", 1.5, label="reference")
    fig.save(path)
