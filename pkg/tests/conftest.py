"""Shared fixtures and independent oracles for the test suite.

The brute-force helpers here deliberately avoid the package's own algorithms
(leaf counting by explicit path enumeration, assignment by permutation
search) so they can serve as ground truth.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from arbormatch.paths import PathSet, RootedPath, decompose
from arbormatch.swc import NeuronTree, SwcRecord, build_tree


def make_tree(parent_ids: list[int], positions=None, seed: int = 0) -> NeuronTree:
    """Build a tree from SWC-style parent ids (vertex i gets id i + 1)."""
    n = len(parent_ids)
    if positions is None:
        rng = np.random.default_rng(seed)
        positions = rng.normal(size=(n, 3)) * 10.0
    records = [
        SwcRecord(
            i + 1, 3, float(positions[i][0]), float(positions[i][1]),
            float(positions[i][2]), 1.0, parent_ids[i],
        )
        for i in range(n)
    ]
    return build_tree(records)


def random_tree(rng: np.random.Generator, n_vertices: int) -> NeuronTree:
    """Random tree: each new vertex attaches to a uniformly chosen earlier one."""
    parent_ids = [-1]
    for v in range(1, n_vertices):
        parent_ids.append(int(rng.integers(0, v)) + 1)
    positions = rng.normal(size=(n_vertices, 3)) * 50.0
    return make_tree(parent_ids, positions)


def random_tree_max_leaves(
    rng: np.random.Generator, n_vertices: int, max_leaves: int
) -> NeuronTree:
    """Random tree whose leaf count stays at or below max_leaves."""
    parent_ids = [-1]
    children = [0]
    leaves = 1
    for v in range(1, n_vertices):
        # attaching to a leaf keeps the count; attaching elsewhere adds one
        if leaves >= max_leaves:
            candidates = [i for i in range(v) if children[i] == 0]
        else:
            candidates = list(range(v))
        parent = int(rng.choice(candidates))
        if children[parent] > 0:
            leaves += 1
        children[parent] += 1
        children.append(0)
        parent_ids.append(parent + 1)
    positions = rng.normal(size=(n_vertices, 3)) * 50.0
    return make_tree(parent_ids, positions)


def sized_tree(n_vertices: int, n_leaves: int, seed: int = 0) -> NeuronTree:
    """Deterministic binary arbor with exact vertex and leaf counts."""
    if n_leaves < 1 or n_vertices < 2 * n_leaves:
        raise ValueError("need n_vertices >= 2 * n_leaves")
    rng = np.random.default_rng(seed)
    n_branches = 2 * n_leaves - 1
    budget = n_vertices - 1
    base = budget // n_branches
    extra = budget - base * n_branches
    steps = [base + (1 if b < extra else 0) for b in range(n_branches)]

    records = [SwcRecord(1, 1, 0.0, 0.0, 0.0, 1.5, -1)]
    next_id = 2
    branch_no = 0

    def grow(parent_id: int, start: np.ndarray, quota: int):
        nonlocal next_id, branch_no
        count = steps[branch_no]
        branch_no += 1
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        pos = start.copy()
        pid = parent_id
        for _ in range(count):
            pos = pos + direction * rng.uniform(2.0, 6.0) + rng.normal(size=3)
            records.append(
                SwcRecord(next_id, 3, float(pos[0]), float(pos[1]), float(pos[2]), 1.0, pid)
            )
            pid = next_id
            next_id += 1
        if quota > 1:
            half = quota // 2
            grow(pid, pos, half)
            grow(pid, pos, quota - half)

    grow(1, np.zeros(3), n_leaves)
    tree = build_tree(records)
    assert tree.n_vertices == n_vertices and tree.n_leaves == n_leaves
    return tree


def random_rooted_path(
    rng: np.random.Generator, k: int, n_leaves: int | None = None, scale: float = 10.0
) -> RootedPath:
    """Standalone path with valid monotone features for unit tests."""
    n = int(rng.integers(1, 12)) if n_leaves is None else n_leaves
    steps = rng.normal(size=(k - 1, 3)) * scale
    positions = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])
    conc = [n]
    for _ in range(k - 1):
        conc.append(int(rng.integers(1, conc[-1] + 1)))
    conc[-1] = 1
    conc_arr = np.asarray(conc, dtype=np.int64)
    return RootedPath(
        path_id=0,
        vertex_ids=tuple(range(1, k + 1)),
        positions=positions,
        concurrence=conc_arr,
        hierarchy=n - conc_arr,
    )


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random proper rotation via QR with sign fixing."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def brute_force_path_counts(tree: NeuronTree) -> np.ndarray:
    """Concurrence oracle: enumerate every root-to-leaf path, count visits."""
    counts = np.zeros(tree.n_vertices, dtype=np.int64)
    for leaf in tree.leaves:
        v = leaf
        counts[v] += 1
        while tree.parents[v] >= 0:
            v = int(tree.parents[v])
            counts[v] += 1
    return counts


def brute_force_min_total(matrix: np.ndarray) -> float:
    """Exhaustive assignment optimum for rows <= cols matrices."""
    m = np.asarray(matrix, dtype=np.float64)
    rows, cols = m.shape
    assert rows <= cols <= 8
    best = np.inf
    for perm in itertools.permutations(range(cols), rows):
        best = min(best, sum(m[i, p] for i, p in enumerate(perm)))
    return float(best)


def brute_force_lex_assignment(matrix: np.ndarray) -> tuple[int, ...]:
    """Lexicographically smallest optimal permutation, by full enumeration.

    Only exact on matrices whose entries make float sums exact (small
    integers), which is what the tie-break tests use.
    """
    m = np.asarray(matrix, dtype=np.float64)
    n = m.shape[0]
    assert m.shape == (n, n) and n <= 8
    best: tuple[int, ...] | None = None
    best_total = np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(m[i, p] for i, p in enumerate(perm))
        if total < best_total:  # permutations arrive in lexicographic order
            best_total = total
            best = perm
    assert best is not None
    return best


def polyline_length(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


# one line per acceptance criterion, echoed after the test summary so the
# verdicts survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture
def small_path_sets() -> tuple[PathSet, PathSet]:
    """Two small deterministic neurons for pipeline tests."""
    from arbormatch.swc import translate_to_origin
    from arbormatch.synth import MorphologyParams, synthetic_neuron

    pa = MorphologyParams(n_leaves=4, scale=30.0, steps_min=3, steps_max=5)
    pb = MorphologyParams(n_leaves=6, scale=35.0, steps_min=3, steps_max=5)
    a = decompose(translate_to_origin(synthetic_neuron(pa, 101)), "a")
    b = decompose(translate_to_origin(synthetic_neuron(pb, 202)), "b")
    return a, b
