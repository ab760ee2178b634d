"""Decomposing a neuron tree into root-to-leaf paths.

Every leaf induces one path from the root, so a neuron with n leaves yields
exactly n paths and every vertex lies on at least one of them.  Two integer
features drive the downstream metric:

* concurrence: how many of the n paths pass through a vertex, which equals
  the number of leaves in that vertex's subtree (n at the root, 1 at leaves,
  non-increasing from root to leaf);
* hierarchy: n minus concurrence (0 at the root, n - 1 at leaves), a measure
  of how deep into the arbor a vertex sits.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .swc import NeuronTree, load_swc, translate_to_origin

__all__ = [
    "RootedPath",
    "PathSet",
    "concurrence",
    "hierarchy",
    "decompose",
    "as_path_set",
]


@dataclass(frozen=True)
class RootedPath:
    """One root-to-leaf path with per-vertex features.

    ``positions[k]`` is the coordinate of ``vertex_ids[k]``; the first entry
    is the root and the last a leaf.  ``concurrence`` and ``hierarchy`` carry
    the tree-level features restricted to this path.
    """

    path_id: int
    vertex_ids: tuple[int, ...]
    positions: np.ndarray
    concurrence: np.ndarray
    hierarchy: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)

    def __len__(self) -> int:
        return len(self.vertex_ids)


@dataclass(frozen=True)
class PathSet:
    """All root-to-leaf paths of one neuron, in leaf discovery order."""

    neuron_id: str
    paths: tuple[RootedPath, ...]

    @property
    def n(self) -> int:
        return len(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def concurrence(tree: NeuronTree) -> np.ndarray:
    """Per-vertex count of root-to-leaf paths passing through.

    Equals the leaf count of each vertex's subtree, computed bottom-up.
    """
    n = tree.n_vertices
    counts = np.zeros(n, dtype=np.int64)
    # children-first order without recursion: reversed preorder
    order: list[int] = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(tree.children[v])
    for v in reversed(order):
        kids = tree.children[v]
        counts[v] = 1 if not kids else sum(counts[c] for c in kids)
    return counts


def hierarchy(tree: NeuronTree, conc: np.ndarray | None = None) -> np.ndarray:
    """Complement of concurrence: n_leaves minus concurrence, per vertex."""
    if conc is None:
        conc = concurrence(tree)
    return tree.n_leaves - conc


def decompose(tree: NeuronTree, neuron_id: str = "") -> PathSet:
    """Split a tree into its root-to-leaf paths.

    Path ids are 0-based in leaf discovery order of a depth-first walk that
    visits children in file order, so the result is deterministic for a given
    file.
    """
    conc = concurrence(tree)
    hier = tree.n_leaves - conc

    # leaves in discovery order of a depth-first walk, children in file order
    leaf_order: list[int] = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        kids = tree.children[v]
        if not kids:
            leaf_order.append(v)
        else:
            stack.extend(reversed(kids))

    paths: list[RootedPath] = []
    for path_id, leaf in enumerate(leaf_order):
        chain = [leaf]
        v = leaf
        while tree.parents[v] >= 0:
            v = int(tree.parents[v])
            chain.append(v)
        idx = np.array(chain[::-1], dtype=np.int64)
        positions = tree.positions[idx].copy()
        positions.setflags(write=False)
        c = conc[idx].copy()
        h = hier[idx].copy()
        c.setflags(write=False)
        h.setflags(write=False)
        paths.append(
            RootedPath(
                path_id=path_id,
                vertex_ids=tuple(int(tree.ids[i]) for i in idx),
                positions=positions,
                concurrence=c,
                hierarchy=h,
            )
        )
    return PathSet(neuron_id=neuron_id, paths=tuple(paths))


def as_path_set(
    neuron: "str | Path | NeuronTree | PathSet",
    *,
    take_largest_root: bool = False,
) -> PathSet:
    """Coerce a file path, tree, or ready PathSet into a PathSet.

    Trees are shifted so the root sits at the origin before decomposition;
    a PathSet passes through untouched.
    """
    if isinstance(neuron, PathSet):
        return neuron
    if isinstance(neuron, NeuronTree):
        return decompose(translate_to_origin(neuron))
    if isinstance(neuron, (str, Path)):
        tree = load_swc(neuron, take_largest_root=take_largest_root)
        return decompose(translate_to_origin(tree), neuron_id=Path(neuron).stem)
    raise TypeError(
        f"expected an SWC path, NeuronTree, or PathSet, got {type(neuron).__name__}"
    )
