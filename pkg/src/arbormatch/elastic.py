"""Square-root-velocity (SRV) curve representation and rigid registration.

A path sampled at m points on the unit parameter interval maps to m - 1 SRV
samples q_k = v_k / sqrt(|v_k|), where v_k is the forward-difference velocity.
The representation is translation invariant, preserves arc length as the
squared norm (integral of |q|^2), and turns rigid rotation of the path into
rotation of q.  Curves are deliberately not rescaled to unit length, so
straight-line blends between SRV curves are the natural morphing paths and
comparisons remain scale aware.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePathError

__all__ = [
    "SrvCurve",
    "Rotation3",
    "srv_transform",
    "srv_inverse",
    "kabsch",
    "register",
    "morph",
]


@dataclass(frozen=True)
class SrvCurve:
    """SRV samples of one path: (m-1, 3) array, grid step, and start point."""

    samples: np.ndarray
    dt: float
    origin: np.ndarray

    @property
    def m(self) -> int:
        """Number of points on the underlying path."""
        return len(self.samples) + 1


@dataclass(frozen=True)
class Rotation3:
    """A proper rotation; degenerate marks an underdetermined fit."""

    matrix: np.ndarray
    degenerate: bool = False


def _as_points(path) -> np.ndarray:
    pts = np.asarray(getattr(path, "positions", path), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
        raise ValueError(f"expected an (m, 3) array with m >= 2, got shape {pts.shape}")
    return pts


def srv_transform(path) -> SrvCurve:
    """Map sampled points to their SRV curve.

    Accepts a ResampledPath or a plain (m, 3) array.  Coincident consecutive
    samples have no direction and raise DegeneratePathError.
    """
    pts = _as_points(path)
    m = len(pts)
    dt = 1.0 / (m - 1)
    vel = (pts[1:] - pts[:-1]) * (m - 1)
    speed = np.linalg.norm(vel, axis=1)
    zero = np.flatnonzero(speed == 0.0)
    if zero.size:
        raise DegeneratePathError(
            f"coincident samples at index {int(zero[0])}: SRV undefined"
        )
    q = vel / np.sqrt(speed)[:, None]
    q.setflags(write=False)
    origin = pts[0].copy()
    origin.setflags(write=False)
    return SrvCurve(samples=q, dt=dt, origin=origin)


def srv_inverse(curve: SrvCurve, start: np.ndarray | None = None) -> np.ndarray:
    """Rebuild path points from an SRV curve.

    The reconstruction starts at ``start`` (default: the curve's recorded
    origin); srv_inverse(srv_transform(p)) returns p up to rounding.
    """
    q = np.asarray(curve.samples, dtype=np.float64)
    norms = np.linalg.norm(q, axis=1)
    steps = q * norms[:, None] * curve.dt
    pts = np.empty((len(q) + 1, 3), dtype=np.float64)
    pts[0] = curve.origin if start is None else np.asarray(start, dtype=np.float64)
    np.cumsum(steps, axis=0, out=pts[1:])
    pts[1:] += pts[0]
    return pts


def kabsch(q_moving: SrvCurve, q_fixed: SrvCurve) -> Rotation3:
    """Best-fit rotation taking q_moving's samples onto q_fixed's.

    Solves the orthogonal Procrustes problem restricted to proper rotations
    (SVD of the 3x3 cross-covariance, with the smallest singular direction
    sign-flipped when needed to keep det = +1).  A zero cross-covariance
    leaves the rotation undetermined; the identity is returned with
    ``degenerate=True``.
    """
    a = np.asarray(q_moving.samples, dtype=np.float64)
    b = np.asarray(q_fixed.samples, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"sample shapes differ: {a.shape} vs {b.shape}")
    h = a.T @ b
    if not h.any():
        return Rotation3(matrix=np.eye(3), degenerate=True)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(u) * np.linalg.det(vt))
    if d == 0:  # numerically singular determinant; fall back to +1
        d = 1.0
    flip = np.diag([1.0, 1.0, d])
    r = vt.T @ flip @ u.T
    r.setflags(write=False)
    return Rotation3(matrix=r)


def register(q_moving: SrvCurve, q_fixed: SrvCurve) -> SrvCurve:
    """Rotate q_moving onto q_fixed with its best-fit rotation.

    The recorded origin is rotated along so that inverting the result gives
    the rigidly rotated path.
    """
    rot = kabsch(q_moving, q_fixed)
    samples = q_moving.samples @ rot.matrix.T
    samples.setflags(write=False)
    origin = rot.matrix @ q_moving.origin
    origin.setflags(write=False)
    return SrvCurve(samples=samples, dt=q_moving.dt, origin=origin)


def morph(
    q_from: SrvCurve,
    q_to: SrvCurve,
    frames: int,
    start_from: np.ndarray | None = None,
    start_to: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Straight-line blend between two SRV curves, returned as path points.

    Emits ``frames`` point arrays; the first is the source path, the last the
    target.  Because SRV space is flat, the per-frame curves are the shortest
    elastic deformation between the two shapes.  Start points are blended
    linearly alongside.
    """
    if frames < 2:
        raise ValueError(f"frames must be >= 2, got {frames}")
    if q_from.samples.shape != q_to.samples.shape:
        raise ValueError(
            f"sample shapes differ: {q_from.samples.shape} vs {q_to.samples.shape}"
        )
    p0 = np.asarray(q_from.origin if start_from is None else start_from, dtype=np.float64)
    p1 = np.asarray(q_to.origin if start_to is None else start_to, dtype=np.float64)
    out: list[np.ndarray] = []
    for tau in np.linspace(0.0, 1.0, frames):
        q_tau = (1.0 - tau) * q_from.samples + tau * q_to.samples
        start = (1.0 - tau) * p0 + tau * p1
        out.append(srv_inverse(SrvCurve(q_tau, q_from.dt, start)))
    return out
