"""SE(2) group and se(2) algebra operations.

Algebra coordinates are ordered translation first, ``z = (zx, zy, ztheta)``.
Every function broadcasts over leading axes, so ``z`` may be ``(3,)`` or
``(..., 3)`` and group elements ``(3, 3)`` or ``(..., 3, 3)``.

The distortion matrix ``U`` and its inverse describe how inputs enter the
logarithm of the left-invariant tracking error::

    U^-1(z) = -sum_k ad(z)^k / (k+1)!        U(0) = -I
"""
import math

import numpy as np

from .errors import BranchSingularity, StructureViolation

TAU_SERIES = 1e-4
TAU_BRANCH = 1e-6
N_SERIES = 30
STRUCTURE_TOL = 1e-12


def _as_vec(z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 3:
        raise ValueError(f"expected (..., 3) algebra vector, got shape {z.shape}")
    return z


# (t - sin t)/t^3 = sum_k (-1)^k t^(2k) / (2k+3)!, truncation < 1e-17 for |t| < 0.5
_TMS_COEFFS = [(-1) ** k / math.factorial(2 * k + 3) for k in range(7)]
_TMS_SWITCH = 0.5


def _trig_coeffs(theta):
    """Return (sin t/t, (1-cos t)/t, (1-cos t)/t^2, (t-sin t)/t^2).

    1 - cos t is evaluated as 2 sin^2(t/2); t - sin t uses its series below
    0.5 rad, where the direct difference cancels.
    """
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < TAU_SERIES
    t = np.where(small, 1.0, theta)
    s = np.sin(t)
    h = np.sin(0.5 * t)
    one_minus_c = 2 * h * h
    t2 = theta * theta
    a = np.where(small, 1 - t2 / 6 + t2 * t2 / 120 - t2**3 / 5040, s / t)
    b = np.where(small, theta * (0.5 - t2 / 24 + t2 * t2 / 720), one_minus_c / t)
    g = np.where(small, 0.5 - t2 / 24 + t2 * t2 / 720 - t2**3 / 40320, one_minus_c / (t * t))
    tms = np.zeros_like(t2)
    for coef in reversed(_TMS_COEFFS):
        tms = tms * t2 + coef
    d = np.where(np.abs(theta) < _TMS_SWITCH, theta * tms, (t - s) / (t * t))
    return a, b, g, d


def _trig_scalar(t):
    if abs(t) < TAU_SERIES:
        t2 = t * t
        return (1 - t2 / 6 + t2 * t2 / 120 - t2**3 / 5040, t * (0.5 - t2 / 24 + t2 * t2 / 720),
                0.5 - t2 / 24 + t2 * t2 / 720 - t2**3 / 40320, t * (1 / 6 - t2 / 120 + t2 * t2 / 5040))
    h = math.sin(0.5 * t)
    omc = 2 * h * h
    if abs(t) < _TMS_SWITCH:
        t2 = t * t
        c0, c1, c2, c3, c4, c5, c6 = _TMS_COEFFS
        d = t * (c0 + t2 * (c1 + t2 * (c2 + t2 * (c3 + t2 * (c4 + t2 * (c5 + t2 * c6))))))
    else:
        d = (t - math.sin(t)) / (t * t)
    return math.sin(t) / t, omc / t, omc / (t * t), d


def wedge(z):
    """Map algebra coordinates to the 3x3 se(2) matrix."""
    z = _as_vec(z)
    m = np.zeros(z.shape[:-1] + (3, 3))
    m[..., 0, 1] = -z[..., 2]
    m[..., 1, 0] = z[..., 2]
    m[..., 0, 2] = z[..., 0]
    m[..., 1, 2] = z[..., 1]
    return m


def vee(m, tol=STRUCTURE_TOL):
    """Inverse of :func:`wedge`; raises StructureViolation on a malformed matrix."""
    m = np.asarray(m, dtype=float)
    bad = (
        np.abs(m[..., 2, :]).max(axis=-1) > tol
    ) | (np.abs(m[..., 0, 0]) > tol) | (np.abs(m[..., 1, 1]) > tol) | (
        np.abs(m[..., 0, 1] + m[..., 1, 0]) > tol
    )
    if np.any(bad):
        raise StructureViolation("matrix is not an element of se(2)")
    return np.stack([m[..., 0, 2], m[..., 1, 2], m[..., 1, 0]], axis=-1)


def pose(x, y, theta):
    """Group element from position and heading."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, x], [s, c, y], [0.0, 0.0, 1.0]])


def pose_params(X):
    """(x, y, heading) of a group element; heading in (-pi, pi]."""
    X = np.asarray(X, dtype=float)
    return np.stack([X[..., 0, 2], X[..., 1, 2], np.arctan2(X[..., 1, 0], X[..., 0, 0])], axis=-1)


def inverse(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        (c, _, x), (s, _, y), _ = X.tolist()
        return np.array([[c, s, -c * x - s * y], [-s, c, s * x - c * y], [0.0, 0.0, 1.0]])
    R = X[..., :2, :2]
    Rt = np.swapaxes(R, -1, -2)
    out = np.zeros_like(X)
    out[..., :2, :2] = Rt
    out[..., :2, 2] = -np.einsum("...ij,...j->...i", Rt, X[..., :2, 2])
    out[..., 2, 2] = 1.0
    return out


def is_group_element(X, tol=1e-9):
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != (3, 3):
        return False
    R = X[..., :2, :2]
    orth = np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(2)).max() <= tol
    det = np.abs(np.linalg.det(R) - 1).max() <= tol
    bottom = np.abs(X[..., 2, :] - np.array([0.0, 0.0, 1.0])).max() <= tol
    return bool(orth and det and bottom)


def exp_group(z):
    z = _as_vec(z)
    if z.ndim == 1:
        x, y, th = z.tolist()
        a, b, _, _ = _trig_scalar(th)
        c, s = math.cos(th), math.sin(th)
        return np.array([[c, -s, a * x - b * y], [s, c, b * x + a * y], [0.0, 0.0, 1.0]])
    theta = z[..., 2]
    a, b, _, _ = _trig_coeffs(theta)
    c, s = np.cos(theta), np.sin(theta)
    X = np.zeros(z.shape[:-1] + (3, 3))
    X[..., 0, 0] = c
    X[..., 0, 1] = -s
    X[..., 1, 0] = s
    X[..., 1, 1] = c
    X[..., 0, 2] = a * z[..., 0] - b * z[..., 1]
    X[..., 1, 2] = b * z[..., 0] + a * z[..., 1]
    X[..., 2, 2] = 1.0
    return X


def log_group(X, tau_branch=TAU_BRANCH):
    """Principal logarithm; heading in (-pi, pi)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        (r00, _, px), (r10, _, py), _ = X.tolist()
        th = math.atan2(r10, r00)
        if abs(th) > math.pi - tau_branch:
            raise BranchSingularity("rotation angle within branch guard of +-pi")
        a, b, _, _ = _trig_scalar(th)
        den = a * a + b * b
        return np.array([(a * px + b * py) / den, (-b * px + a * py) / den, th])
    theta = np.arctan2(X[..., 1, 0], X[..., 0, 0])
    if np.any(np.abs(theta) > math.pi - tau_branch):
        raise BranchSingularity("rotation angle within branch guard of +-pi")
    a, b, _, _ = _trig_coeffs(theta)
    den = a * a + b * b
    px, py = X[..., 0, 2], X[..., 1, 2]
    return np.stack([(a * px + b * py) / den, (-b * px + a * py) / den, theta], axis=-1)


def adjoint_group(X):
    """Ad_X acting on algebra coordinates: [[R, (py, -px)], [0, 1]]."""
    X = np.asarray(X, dtype=float)
    Ad = np.zeros(X.shape)
    Ad[..., :2, :2] = X[..., :2, :2]
    Ad[..., 0, 2] = X[..., 1, 2]
    Ad[..., 1, 2] = -X[..., 0, 2]
    Ad[..., 2, 2] = 1.0
    return Ad


def adjoint_algebra(z):
    """ad_z = [[0, -w, vy], [w, 0, -vx], [0, 0, 0]]."""
    z = _as_vec(z)
    if z.ndim == 1:
        x, y, th = z.tolist()
        return np.array([[0.0, -th, y], [th, 0.0, -x], [0.0, 0.0, 0.0]])
    ad = np.zeros(z.shape[:-1] + (3, 3))
    ad[..., 0, 1] = -z[..., 2]
    ad[..., 1, 0] = z[..., 2]
    ad[..., 0, 2] = z[..., 1]
    ad[..., 1, 2] = -z[..., 0]
    return ad


def _ad_series(z, terms, sign):
    """sum_{k<terms} sign^k ad^k / (k+1)!"""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    ad = sign * adjoint_algebra(z)
    term = np.broadcast_to(np.eye(3), ad.shape).copy()
    total = term.copy()
    for k in range(1, terms):
        term = term @ ad / (k + 1)
        total = total + term
    return total


def dexpinv_series(z, terms=N_SERIES):
    """(I - exp(-ad_z)) / ad_z as the truncated series sum (-1)^k ad^k/(k+1)!.

    This is the left-trivialised derivative of ``exp``:
    ``d/dt exp(z(t)) = exp(z) wedge(dexpinv_series(z) @ z')``.
    """
    return _ad_series(z, terms, -1.0)


def dexpinv(z):
    """Closed-form inverse of :func:`dexpinv_series`, i.e. ad_z / (I - exp(-ad_z))."""
    return -u_left(-_as_vec(z), tau_branch=0.0)


def u_left_inv_series(z, terms=N_SERIES):
    return -_ad_series(z, terms, 1.0)


def u_left_inv(z):
    """Inverse distortion matrix, closed form (Taylor forms below TAU_SERIES)."""
    z = _as_vec(z)
    if z.ndim == 1:
        zx, zy, th = z.tolist()
        a, b, g, d = _trig_scalar(th)
        return np.array([[-a, b, -(g * zy + d * zx)], [-b, -a, g * zx - d * zy], [0.0, 0.0, -1.0]])
    a, b, g, d = _trig_coeffs(z[..., 2])
    zx, zy = z[..., 0], z[..., 1]
    M = np.zeros(z.shape[:-1] + (3, 3))
    M[..., 0, 0] = -a
    M[..., 0, 1] = b
    M[..., 1, 0] = -b
    M[..., 1, 1] = -a
    M[..., 0, 2] = -(g * zy + d * zx)
    M[..., 1, 2] = -(-g * zx + d * zy)
    M[..., 2, 2] = -1.0
    return M


def u_left(z, tau_branch=TAU_BRANCH):
    """Distortion matrix U of the left-invariant log error; U(0) = -I."""
    z = _as_vec(z)
    if z.ndim == 1:
        zx, zy, th = z.tolist()
        if abs(th) > math.pi - tau_branch:
            raise BranchSingularity("|ztheta| within branch guard of pi")
        a, b, g, d = _trig_scalar(th)
        ia, ib = a / (2 * g), b / (2 * g)
        wx, wy = g * zy + d * zx, -g * zx + d * zy
        return np.array([[-ia, -ib, ia * wx + ib * wy], [ib, -ia, -ib * wx + ia * wy], [0.0, 0.0, -1.0]])
    theta = z[..., 2]
    if np.any(np.abs(theta) > math.pi - tau_branch):
        raise BranchSingularity("|ztheta| within branch guard of pi")
    a, b, g, d = _trig_coeffs(theta)
    zx, zy = z[..., 0], z[..., 1]
    # top-left block of U^-1 is -(a I + b J); its inverse is -(a I - b J) / (a^2 + b^2) = -(a I - b J) / (2 g)
    n = 2 * g
    ia, ib = a / n, b / n
    # V2 (zy, -zx)
    wx = g * zy + d * zx
    wy = -g * zx + d * zy
    M = np.zeros(z.shape[:-1] + (3, 3))
    M[..., 0, 0] = -ia
    M[..., 0, 1] = -ib
    M[..., 1, 0] = ib
    M[..., 1, 1] = -ia
    M[..., 0, 2] = ia * wx + ib * wy
    M[..., 1, 2] = -ib * wx + ia * wy
    M[..., 2, 2] = -1.0
    return M


def u_right_inv(z, terms=N_SERIES):
    """-sum (-1)^k ad^k/(k+1)!  (right-invariant error)."""
    return -_ad_series(z, terms, -1.0)


def u_right(z, terms=N_SERIES, max_cond=1e8):
    M = u_right_inv(z, terms)
    if np.any(np.linalg.cond(M) > max_cond):
        raise BranchSingularity("right distortion matrix is ill-conditioned")
    return np.linalg.inv(M)


def det_u_inv(theta):
    """Determinant of U^-1: 2(cos t - 1)/t^2."""
    _, _, g, _ = _trig_coeffs(theta)
    return -2.0 * g
