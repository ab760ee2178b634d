"""Deterministic synthetic neuron generation.

Grows random binary arbors with controllable leaf count, segment scale, and
tortuosity.  Five built-in presets are spread far apart in both topology and
scale, giving a labeled corpus whose classes a working distance should
separate almost perfectly; that makes them useful for end-to-end retrieval
checks without shipping real reconstructions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .swc import NeuronTree, SwcRecord, build_tree, to_swc

__all__ = ["MorphologyParams", "CLASS_PRESETS", "synthetic_neuron", "synthetic_corpus"]


@dataclass(frozen=True)
class MorphologyParams:
    """Growth parameters for one synthetic neuron class.

    n_leaves fixes the number of terminal tips exactly.  scale is the mean
    step length in micrometres, steps the per-branch vertex count range,
    wiggle the per-step direction jitter, branch_angle the mean half-angle
    between sibling branches.  even_split grows balanced arbors (useful when
    a bounded tree depth matters more than variety).
    """

    n_leaves: int
    scale: float
    steps_min: int = 3
    steps_max: int = 7
    wiggle: float = 0.3
    branch_angle: float = 0.7
    even_split: bool = False

    def __post_init__(self):
        if self.n_leaves < 1:
            raise ValueError(f"n_leaves must be >= 1, got {self.n_leaves}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not 1 <= self.steps_min <= self.steps_max:
            raise ValueError(
                f"need 1 <= steps_min <= steps_max, got {self.steps_min}..{self.steps_max}"
            )


CLASS_PRESETS: dict[str, MorphologyParams] = {
    "sparse": MorphologyParams(n_leaves=3, scale=18.0, steps_min=3, steps_max=6, wiggle=0.25),
    "tufted": MorphologyParams(n_leaves=5, scale=45.0, steps_min=3, steps_max=7, wiggle=0.3),
    "bushy": MorphologyParams(n_leaves=7, scale=120.0, steps_min=4, steps_max=8, wiggle=0.35),
    "spreading": MorphologyParams(n_leaves=9, scale=320.0, steps_min=4, steps_max=8, wiggle=0.3),
    "thicket": MorphologyParams(n_leaves=11, scale=850.0, steps_min=5, steps_max=9, wiggle=0.4),
}


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _random_perpendicular(rng: np.random.Generator, d: np.ndarray) -> np.ndarray:
    while True:
        raw = rng.normal(size=3)
        perp = raw - np.dot(raw, d) * d
        norm = np.linalg.norm(perp)
        if norm > 1e-8:
            return perp / norm


def synthetic_neuron(
    params: MorphologyParams,
    seed: "int | np.random.SeedSequence | np.random.Generator" = 0,
) -> NeuronTree:
    """Grow one random arbor with exactly ``params.n_leaves`` terminal tips.

    The same seed always yields the same tree.  Branches carry a leaf quota
    that is split (evenly or at random) at each bifurcation until every
    branch ends in a single tip.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    records: list[SwcRecord] = [SwcRecord(1, 1, 0.0, 0.0, 0.0, 2.0, -1)]
    next_id = 2

    def grow_branch(parent_id: int, start: np.ndarray, direction: np.ndarray, quota: int, depth: int):
        nonlocal next_id
        steps = int(rng.integers(params.steps_min, params.steps_max + 1))
        pos = start.copy()
        d = direction.copy()
        radius = max(0.3, 2.0 * (0.75 ** depth))
        pid = parent_id
        for _ in range(steps):
            d = _unit(d + params.wiggle * rng.normal(size=3))
            pos = pos + d * (params.scale * rng.uniform(0.7, 1.3))
            records.append(
                SwcRecord(next_id, 3, float(pos[0]), float(pos[1]), float(pos[2]), radius, pid)
            )
            pid = next_id
            next_id += 1
        if quota == 1:
            return
        if params.even_split:
            q1 = quota // 2
        else:
            q1 = int(rng.integers(1, quota))
        angle = params.branch_angle * rng.uniform(0.7, 1.3)
        perp = _random_perpendicular(rng, d)
        d1 = _unit(np.cos(angle) * d + np.sin(angle) * perp)
        d2 = _unit(np.cos(angle) * d - np.sin(angle) * perp)
        grow_branch(pid, pos, d1, q1, depth + 1)
        grow_branch(pid, pos, d2, quota - q1, depth + 1)

    first_dir = _unit(rng.normal(size=3))
    grow_branch(1, np.zeros(3), first_dir, params.n_leaves, 0)
    return build_tree(records)


def synthetic_corpus(
    out_dir: "str | Path",
    per_class: int = 10,
    seed: int = 0,
    classes: dict[str, MorphologyParams] | None = None,
) -> Path:
    """Write a labeled corpus of SWC files plus a manifest.csv.

    The manifest has columns id, relative_path (resolved against the
    manifest), and label; it is the input format for the retrieval commands.
    Returns the manifest path.
    """
    if per_class < 1:
        raise ValueError(f"per_class must be >= 1, got {per_class}")
    presets = CLASS_PRESETS if classes is None else classes
    if not presets:
        raise ValueError("no classes given")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    labels = sorted(presets)
    seeds = np.random.SeedSequence(seed).spawn(len(labels) * per_class)
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "relative_path", "label"])
        for ci, label in enumerate(labels):
            for k in range(per_class):
                tree = synthetic_neuron(presets[label], seeds[ci * per_class + k])
                name = f"{label}_{k:03d}"
                filename = f"{name}.swc"
                (out / filename).write_text(
                    to_swc(tree, header=f"synthetic neuron, class {label}, seed {seed}")
                )
                writer.writerow([name, filename, label])
    return manifest
