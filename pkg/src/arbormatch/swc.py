"""Reading, validating, and writing SWC neuron reconstructions.

An SWC file is plain text: one record per line with seven whitespace-separated
fields (id, structure code, x, y, z, radius, parent id), ``#`` comment lines,
and blank lines.  Coordinates are in micrometres.  A parent id of -1 marks the
root.  Parsing and tree building are split so that structural checks can
report problems against the original line numbers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import MultipleRootsError, SwcParseError, SwcValidationError

__all__ = [
    "SwcRecord",
    "NeuronTree",
    "parse_swc",
    "read_swc",
    "build_tree",
    "load_swc",
    "translate_to_origin",
    "to_swc",
]


@dataclass(frozen=True)
class SwcRecord:
    """One SWC line: a sample point plus its parent link."""

    id: int
    structure_code: int
    x: float
    y: float
    z: float
    radius: float
    parent_id: int
    line: int = 0  # 1-based source line, 0 if synthetic


@dataclass(frozen=True)
class NeuronTree:
    """A rooted neuron reconstruction in file order.

    Attributes
    ----------
    ids : (n,) int64 array
        Original SWC sample ids, in file order.
    positions : (n, 3) float64 array
        Coordinates in micrometres.
    radii : (n,) float64 array
    structure_codes : (n,) int64 array
    parents : (n,) int64 array
        Parent vertex indices (not SWC ids); -1 for the root.
    children : tuple of tuples
        Child vertex indices per vertex, in file order.
    root : int
        Vertex index of the root.
    leaves : tuple of int
        Vertex indices with no children, in file order.
    """

    ids: np.ndarray
    positions: np.ndarray
    radii: np.ndarray
    structure_codes: np.ndarray
    parents: np.ndarray
    children: tuple[tuple[int, ...], ...]
    root: int
    leaves: tuple[int, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)


def parse_swc(text: str | bytes, *, path: str | None = None) -> list[SwcRecord]:
    """Parse SWC text into records.

    Skips blank lines and lines whose first non-blank character is ``#``.
    Raises :class:`SwcParseError` on malformed lines and
    :class:`SwcValidationError` on field-level violations (duplicate or
    non-positive ids, negative radii).  Both carry the 1-based line number.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SwcParseError(f"not valid UTF-8 text: {exc}", path=path) from exc

    records: list[SwcRecord] = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 7:
            raise SwcParseError(
                f"expected 7 fields, found {len(fields)}", path=path, line=lineno
            )
        try:
            rid = int(fields[0])
            code = int(fields[1])
            x, y, z = float(fields[2]), float(fields[3]), float(fields[4])
            radius = float(fields[5])
            parent = int(fields[6])
        except ValueError as exc:
            raise SwcParseError(f"bad field value: {exc}", path=path, line=lineno) from exc
        if rid <= 0:
            raise SwcValidationError(f"sample id must be positive, got {rid}", path=path, line=lineno)
        if radius < 0:
            raise SwcValidationError(f"negative radius {radius}", path=path, line=lineno)
        if rid in seen:
            raise SwcValidationError(
                f"duplicate sample id {rid} (first seen on line {seen[rid]})",
                path=path,
                line=lineno,
            )
        seen[rid] = lineno
        records.append(SwcRecord(rid, code, x, y, z, radius, parent, line=lineno))
    return records


def read_swc(path: str | Path) -> list[SwcRecord]:
    """Read and parse an SWC file."""
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise SwcParseError(f"cannot read file: {exc.strerror or exc}", path=str(p)) from exc
    return parse_swc(data, path=str(p))


def _collapse_duplicates(
    positions: np.ndarray, parents: np.ndarray, root: int, path: str | None
) -> tuple[np.ndarray, np.ndarray]:
    """Drop vertices whose position equals their nearest kept ancestor's.

    Returns (keep mask, effective parent per original vertex). Re-parents the
    children of a dropped vertex to that ancestor, cascading through runs of
    duplicates. Comparison is exact; nearly-equal points are kept.
    """
    n = len(parents)
    order = _topological_order(parents, root, n, path)
    keep = np.ones(n, dtype=bool)
    eff_parent = parents.copy()
    dropped = 0
    for v in order:
        if v == root:
            continue
        p = eff_parent[v]
        # parent appears before v in topological order, so eff_parent[p] is final
        if not keep[p]:
            eff_parent[v] = eff_parent[p]
            p = eff_parent[v]
        if (positions[v] == positions[p]).all():
            keep[v] = False
            dropped += 1
    if dropped:
        warnings.warn(
            f"collapsed {dropped} duplicate consecutive point(s)"
            + (f" in {path}" if path else ""),
            stacklevel=3,
        )
    return keep, eff_parent


def _topological_order(
    parents: np.ndarray, root: int, n: int, path: str | None
) -> np.ndarray:
    """Root-first vertex order; fails if any vertex is unreachable."""
    kids: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        p = parents[v]
        if p >= 0:
            kids[p].append(v)
    order = np.empty(n, dtype=np.int64)
    stack = [root]
    count = 0
    while stack:
        v = stack.pop()
        order[count] = v
        count += 1
        # reversed so lower indices are visited first
        stack.extend(reversed(kids[v]))
    if count != n:
        raise SwcValidationError(
            f"{n - count} sample(s) unreachable from the root "
            "(orphaned subtree or a parent cycle)",
            path=path,
        )
    return order


def build_tree(
    records: list[SwcRecord],
    *,
    take_largest_root: bool = False,
    path: str | None = None,
) -> NeuronTree:
    """Assemble parsed records into a validated :class:`NeuronTree`.

    Exactly one record must have parent id -1; with ``take_largest_root`` a
    multi-root file is reduced to the component with the most samples (ties
    keep the earlier root).  Unknown parent references, cycles, and empty
    inputs raise :class:`SwcValidationError`.  Consecutive samples at exactly
    the same position are merged with a warning.
    """
    if not records:
        raise SwcValidationError("no samples in input", path=path)

    id_to_index = {r.id: i for i, r in enumerate(records)}
    if len(id_to_index) != len(records):
        raise SwcValidationError("duplicate sample ids", path=path)

    roots = [i for i, r in enumerate(records) if r.parent_id == -1]
    if not roots:
        raise SwcValidationError("no root sample (parent id -1) found", path=path)
    if len(roots) > 1 and not take_largest_root:
        raise MultipleRootsError(
            f"{len(roots)} root samples found (lines "
            f"{', '.join(str(records[i].line) for i in roots)}); "
            "pass take_largest_root to keep the largest component",
            path=path,
        )

    n = len(records)
    parents = np.empty(n, dtype=np.int64)
    for i, r in enumerate(records):
        if r.parent_id == -1:
            parents[i] = -1
            continue
        j = id_to_index.get(r.parent_id)
        if j is None:
            raise SwcValidationError(
                f"sample {r.id} references unknown parent id {r.parent_id}",
                path=path,
                line=r.line,
            )
        if j == i:
            raise SwcValidationError(
                f"sample {r.id} is its own parent", path=path, line=r.line
            )
        parents[i] = j

    if len(roots) > 1:
        # component label per vertex; unreachable vertices keep -1 and fail below
        comp = np.full(n, -1, dtype=np.int64)
        kids: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            if parents[v] >= 0:
                kids[parents[v]].append(v)
        for root in roots:
            stack = [root]
            while stack:
                v = stack.pop()
                comp[v] = root
                stack.extend(kids[v])
        if (comp == -1).any():
            raise SwcValidationError(
                f"{int((comp == -1).sum())} sample(s) unreachable from any root "
                "(orphaned subtree or a parent cycle)",
                path=path,
            )
        sizes = {root: int((comp == root).sum()) for root in roots}
        best = max(roots, key=lambda r: (sizes[r], -r))
        kept = [records[i] for i in range(n) if comp[i] == best]
        return build_tree(kept, path=path)

    root = roots[0]
    positions = np.array([[r.x, r.y, r.z] for r in records], dtype=np.float64)
    keep, eff_parent = _collapse_duplicates(positions, parents, root, path)

    if not keep.all():
        new_index = np.cumsum(keep) - 1
        kept_idx = np.flatnonzero(keep)
        ids = np.array([records[i].id for i in kept_idx], dtype=np.int64)
        radii = np.array([records[i].radius for i in kept_idx], dtype=np.float64)
        codes = np.array([records[i].structure_code for i in kept_idx], dtype=np.int64)
        positions = positions[kept_idx]
        new_parents = np.empty(len(kept_idx), dtype=np.int64)
        for new_i, old_i in enumerate(kept_idx):
            p = eff_parent[old_i]
            new_parents[new_i] = -1 if p < 0 else new_index[p]
        parents = new_parents
        root = int(new_index[root])
        n = len(kept_idx)
    else:
        ids = np.array([r.id for r in records], dtype=np.int64)
        radii = np.array([r.radius for r in records], dtype=np.float64)
        codes = np.array([r.structure_code for r in records], dtype=np.int64)

    # reachability check doubles as cycle detection
    _topological_order(parents, root, n, path)

    children_lists: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        if parents[v] >= 0:
            children_lists[parents[v]].append(v)
    children = tuple(tuple(c) for c in children_lists)
    leaves = tuple(v for v in range(n) if not children[v])

    ids.setflags(write=False)
    positions.setflags(write=False)
    radii.setflags(write=False)
    codes.setflags(write=False)
    parents.setflags(write=False)
    return NeuronTree(
        ids=ids,
        positions=positions,
        radii=radii,
        structure_codes=codes,
        parents=parents,
        children=children,
        root=root,
        leaves=leaves,
    )


def load_swc(path: str | Path, *, take_largest_root: bool = False) -> NeuronTree:
    """Read, parse, and build in one step."""
    return build_tree(
        read_swc(path), take_largest_root=take_largest_root, path=str(path)
    )


def translate_to_origin(tree: NeuronTree) -> NeuronTree:
    """Return a copy shifted so the root sits exactly at (0, 0, 0)."""
    shifted = tree.positions - tree.positions[tree.root]
    shifted.setflags(write=False)
    return replace(tree, positions=shifted)


def to_swc(tree: NeuronTree, *, header: str | None = None) -> str:
    """Serialize a tree back to SWC text.

    Floats are written with shortest round-trip formatting, so
    ``build_tree(parse_swc(to_swc(t)))`` reproduces positions bit for bit.
    """
    lines: list[str] = []
    if header:
        lines.extend("# " + h for h in header.splitlines())
    for v in range(tree.n_vertices):
        parent = tree.parents[v]
        parent_id = -1 if parent < 0 else int(tree.ids[parent])
        x, y, z = (repr(float(c)) for c in tree.positions[v])
        lines.append(
            f"{int(tree.ids[v])} {int(tree.structure_codes[v])} {x} {y} {z} "
            f"{repr(float(tree.radii[v]))} {parent_id}"
        )
    return "\n".join(lines) + "\n"
