"""Upsampling paths to a common point count without moving original vertices.

Two paths are compared on a shared grid of m points each, where
m = max(rho, n_i, n_j) for a configured floor rho.  New points are created by
repeatedly bisecting the currently longest inter-point segment (ties broken
toward the segment closer to the root), so every original vertex survives
exactly and inserted points stay on the original polyline.  Integer vertex
features are carried to inserted points from the segment's child-side
endpoint, keeping the feature profiles step-shaped rather than smoothed.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePathError
from .paths import RootedPath

__all__ = [
    "ElasticConfig",
    "ResampledPath",
    "pair_target",
    "resample",
    "interpolate_features",
]


@dataclass(frozen=True)
class ElasticConfig:
    """Knobs for the elastic comparison pipeline.

    rho is the resampling floor (minimum points per path), lam the additive
    constant in the cost denominator, frames the number of steps emitted when
    morphing one path into another.
    """

    rho: int = 100
    lam: float = 1.0
    frames: int = 10

    def __post_init__(self):
        if not isinstance(self.rho, (int, np.integer)) or self.rho < 2:
            raise ValueError(f"rho must be an integer >= 2, got {self.rho!r}")
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise ValueError(f"lam must be a positive finite number, got {self.lam!r}")
        if not isinstance(self.frames, (int, np.integer)) or self.frames < 2:
            raise ValueError(f"frames must be an integer >= 2, got {self.frames!r}")


@dataclass(frozen=True)
class ResampledPath:
    """A path on m points: positions plus features carried to the new grid."""

    positions: np.ndarray
    c_tilde: np.ndarray
    h_tilde: np.ndarray
    is_original: np.ndarray

    @property
    def m(self) -> int:
        return len(self.positions)


def pair_target(n_i: int, n_j: int, rho: int) -> int:
    """Shared sample count for a pair: max(rho, n_i, n_j)."""
    if n_i < 2 or n_j < 2:
        raise ValueError(f"paths need at least 2 vertices, got {n_i} and {n_j}")
    if rho < 2:
        raise ValueError(f"rho must be >= 2, got {rho}")
    return max(rho, n_i, n_j)


def _insertion_fractions(lengths: np.ndarray, n_insert: int) -> list[list[float]]:
    """Interior split fractions per source segment after n_insert bisections.

    Each step bisects the longest current piece; ties go to the piece in the
    lower-index segment, then the piece nearer that segment's start.  Piece
    lengths are tracked analytically (halving on split) so ties stay exact.
    """
    # heap entries: (-length, segment index, start fraction, end fraction)
    heap: list[tuple[float, int, float, float]] = [
        (-float(lengths[j]), j, 0.0, 1.0) for j in range(len(lengths))
    ]
    heapq.heapify(heap)
    fractions: list[list[float]] = [[] for _ in range(len(lengths))]
    for _ in range(n_insert):
        neg_len, j, s, e = heapq.heappop(heap)
        mid = (s + e) / 2.0
        fractions[j].append(mid)
        half = neg_len / 2.0
        heapq.heappush(heap, (half, j, s, mid))
        heapq.heappush(heap, (half, j, mid, e))
    for f in fractions:
        f.sort()
    return fractions


def resample(path: RootedPath, m: int) -> ResampledPath:
    """Upsample a path to exactly m points.

    Raises ValueError if m is below the current vertex count and
    DegeneratePathError if any consecutive vertices coincide.
    """
    pts = path.positions
    k = len(pts)
    if k < 2:
        raise DegeneratePathError(
            f"path {path.path_id} has {k} vertex(es); need at least 2"
        )
    if m < k:
        raise ValueError(f"target m={m} is below the path's {k} vertices")

    deltas = pts[1:] - pts[:-1]
    lengths = np.linalg.norm(deltas, axis=1)
    zero = np.flatnonzero(lengths == 0.0)
    if zero.size:
        raise DegeneratePathError(
            f"path {path.path_id} has coincident points at segment {int(zero[0])}"
        )

    fractions = _insertion_fractions(lengths, m - k)

    blocks: list[np.ndarray] = []
    source_vertex: list[int] = []
    originals: list[np.ndarray] = []
    for j in range(k - 1):
        blocks.append(pts[j : j + 1])
        source_vertex.append(j)
        originals.append(np.array([True]))
        fr = fractions[j]
        if fr:
            f = np.asarray(fr, dtype=np.float64)[:, None]
            blocks.append(pts[j] + f * deltas[j])
            source_vertex.extend([j + 1] * len(fr))
            originals.append(np.zeros(len(fr), dtype=bool))
    blocks.append(pts[k - 1 : k])
    source_vertex.append(k - 1)
    originals.append(np.array([True]))

    positions = np.concatenate(blocks, axis=0)
    is_original = np.concatenate(originals)
    src = np.asarray(source_vertex, dtype=np.int64)
    c_tilde, h_tilde = interpolate_features(path, src)

    positions.setflags(write=False)
    is_original.setflags(write=False)
    return ResampledPath(
        positions=positions, c_tilde=c_tilde, h_tilde=h_tilde, is_original=is_original
    )


def interpolate_features(
    path: RootedPath, source_vertex: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Carry integer features onto a resampled grid.

    ``source_vertex[k]`` names the original vertex whose features sample k
    inherits: original vertices map to themselves, points inserted inside a
    segment to the segment's child-side (leafward) endpoint.
    """
    src = np.asarray(source_vertex, dtype=np.int64)
    if src.ndim != 1 or src.min(initial=0) < 0 or src.max(initial=0) >= len(path):
        raise ValueError("source_vertex entries must index the path's vertices")
    c = path.concurrence[src].astype(np.float64)
    h = path.hierarchy[src].astype(np.float64)
    c.setflags(write=False)
    h.setflags(write=False)
    return c, h
