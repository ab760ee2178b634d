"""Optimal path-to-path assignment between two neurons.

The neurons' path sets are compared with a rectangular cost matrix oriented
so rows belong to the neuron with fewer paths.  Zero-cost dummy rows square
the matrix, an optimal assignment is solved, and the neuron distance is the
sum of matched real-path costs; paths matched to dummy rows stay unmatched
and contribute nothing.  Each path is used at most once in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed, effective_n_jobs
from scipy.optimize import linear_sum_assignment

from .distance import PreparedPath, prepare_path, prepared_cost
from .paths import PathSet, RootedPath
from .resample import ElasticConfig, pair_target

__all__ = [
    "CostMatrix",
    "Assignment",
    "cost_matrix",
    "pad_dummy",
    "hungarian",
    "neuron_distance",
    "pairwise_neuron_distances",
]


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise path costs with rows on the smaller path set.

    ``swapped`` records whether the rows belong to the second neuron passed
    to :func:`cost_matrix` (ties on path count fall back to neuron id so that
    the orientation, and hence the summed distance, is identical regardless
    of argument order).
    """

    values: np.ndarray
    swapped: bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Assignment:
    """Result of matching: (row path id, col path id, cost) triples.

    Rows are the smaller path set; ``swapped`` says whether that was the
    second argument.  ``unmatched`` lists the larger set's leftover path ids
    and ``total`` the summed cost of the matched pairs.
    """

    pairs: tuple[tuple[int, int, float], ...]
    unmatched: tuple[int, ...]
    total: float
    swapped: bool


class _PrepCache:
    """Per-neuron cache of PreparedPath objects keyed by (path index, m)."""

    def __init__(self, paths: tuple[RootedPath, ...]):
        self.paths = paths
        self._store: dict[tuple[int, int], PreparedPath] = {}

    def get(self, idx: int, m: int) -> PreparedPath:
        key = (idx, m)
        hit = self._store.get(key)
        if hit is None:
            hit = prepare_path(self.paths[idx], m)
            self._store[key] = hit
        return hit


def _matrix_values(rc: _PrepCache, cc: _PrepCache, cfg: ElasticConfig) -> np.ndarray:
    rho, lam = cfg.rho, cfg.lam
    values = np.empty((len(rc.paths), len(cc.paths)), dtype=np.float64)
    for i, pi in enumerate(rc.paths):
        ni = len(pi)
        for j, pj in enumerate(cc.paths):
            m = pair_target(ni, len(pj), rho)
            values[i, j] = prepared_cost(rc.get(i, m), cc.get(j, m), lam).value
    return values


def _oriented(a: PathSet, b: PathSet) -> tuple[PathSet, PathSet, bool]:
    if (a.n, a.neuron_id) <= (b.n, b.neuron_id):
        return a, b, False
    return b, a, True


def cost_matrix(a: PathSet, b: PathSet, config: ElasticConfig | None = None) -> CostMatrix:
    """All path-pair costs between two neurons, rows on the smaller set."""
    cfg = config or ElasticConfig()
    if a.n == 0 or b.n == 0:
        raise ValueError("both neurons need at least one path")
    rows, cols, swapped = _oriented(a, b)
    values = _matrix_values(_PrepCache(rows.paths), _PrepCache(cols.paths), cfg)
    values.setflags(write=False)
    return CostMatrix(values=values, swapped=swapped)


def pad_dummy(matrix: CostMatrix | np.ndarray) -> np.ndarray:
    """Square a rows <= cols cost matrix by appending zero-cost dummy rows."""
    values = matrix.values if isinstance(matrix, CostMatrix) else np.asarray(matrix)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {values.shape}")
    rows, cols = values.shape
    if rows > cols:
        raise ValueError(f"matrix has more rows than columns: {values.shape}")
    if rows == cols:
        return values.copy()
    return np.vstack([values, np.zeros((cols - rows, cols), dtype=values.dtype)])


def _suffix_total(matrix: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> float:
    if len(rows) == 0:
        return 0.0
    sub = matrix[np.ix_(rows, cols)]
    ri, ci = linear_sum_assignment(sub)
    return float(sub[ri, ci].sum())


def hungarian(matrix: np.ndarray, *, refine_ties: bool = True) -> np.ndarray:
    """Minimum-cost perfect assignment on a square matrix.

    Returns the column assigned to each row.  With ``refine_ties`` the result
    is the lexicographically smallest permutation among all minimizers
    (row 0's column minimized first, then row 1's, and so on), which pins
    down the output when dummy rows or repeated costs create ties.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("cost matrix contains non-finite entries")
    n = m.shape[0]
    row_ind, col_ind = linear_sum_assignment(m)
    if not refine_ties or n <= 1:
        return col_ind.astype(np.int64)

    assigned = np.empty(n, dtype=np.int64)
    avail: list[int] = list(range(n))
    for i in range(n):
        if len(avail) == 1:
            assigned[i] = avail[0]
            break
        # common padded case: an all-zero tail matches smallest columns in order
        if not m[np.ix_(np.arange(i, n), avail)].any():
            assigned[i:] = avail
            break
        rest = np.arange(i + 1, n)
        best_col = -1
        best_total = np.inf
        for pos, c in enumerate(avail):
            others = np.array(avail[:pos] + avail[pos + 1 :], dtype=np.int64)
            total = m[i, c] + _suffix_total(m, rest, others)
            if total < best_total:
                best_total = total
                best_col = c
        assigned[i] = best_col
        avail.remove(best_col)
    return assigned


def _solve(
    values: np.ndarray,
    row_paths: tuple[RootedPath, ...],
    col_paths: tuple[RootedPath, ...],
    swapped: bool,
    refine_ties: bool,
) -> tuple[float, Assignment]:
    n_rows, n_cols = values.shape
    if refine_ties:
        perm = hungarian(pad_dummy(values))
        row_cols = perm[:n_rows]
    else:
        _, row_cols = linear_sum_assignment(values)
    costs = values[np.arange(n_rows), row_cols]
    total = float(costs.sum())
    pairs = tuple(
        (row_paths[i].path_id, col_paths[int(c)].path_id, float(costs[i]))
        for i, c in enumerate(row_cols)
    )
    matched = {int(c) for c in row_cols}
    unmatched = tuple(
        col_paths[j].path_id for j in range(n_cols) if j not in matched
    )
    return total, Assignment(pairs=pairs, unmatched=unmatched, total=total, swapped=swapped)


def neuron_distance(
    a: PathSet,
    b: PathSet,
    config: ElasticConfig | None = None,
    *,
    refine_ties: bool = True,
) -> tuple[float, Assignment]:
    """Distance between two neurons plus the path matching that realizes it.

    The distance is the sum of matched path costs under the optimal
    assignment; the larger neuron's surplus paths are left unmatched.  It is
    symmetric in its arguments and zero for identical neurons.  The optimal
    total never depends on ``refine_ties``; disabling it only relaxes which
    of several equally cheap matchings is reported (useful in bulk runs).
    """
    cfg = config or ElasticConfig()
    cm = cost_matrix(a, b, cfg)
    rows, cols, _ = _oriented(a, b)
    return _solve(cm.values, rows.paths, cols.paths, cm.swapped, refine_ties)


def _cached_pair(
    ca: _PrepCache, cb: _PrepCache, ia: int, ib: int, cfg: ElasticConfig, refine: bool
) -> tuple[float, Assignment]:
    """One pair with caches; rows go to the smaller set, ties to ``ia``."""
    swap = (len(cb.paths), ib) < (len(ca.paths), ia)
    rc, cc = (cb, ca) if swap else (ca, cb)
    values = _matrix_values(rc, cc, cfg)
    return _solve(values, rc.paths, cc.paths, swap, refine)


def _pair_block(
    a_sets: list[PathSet],
    b_sets: list[PathSet] | None,
    pairs: list[tuple[int, int]],
    cfg: ElasticConfig,
    refine: bool,
) -> list[tuple[int, int, float, Assignment]]:
    caches_a: dict[int, _PrepCache] = {}
    caches_b: dict[int, _PrepCache] = {} if b_sets is not None else caches_a
    b_source = a_sets if b_sets is None else b_sets
    out = []
    for i, j in pairs:
        if i not in caches_a:
            caches_a[i] = _PrepCache(a_sets[i].paths)
        if j not in caches_b:
            caches_b[j] = _PrepCache(b_source[j].paths)
        ib = j if b_sets is None else len(a_sets) + j
        d, asg = _cached_pair(caches_a[i], caches_b[j], i, ib, cfg, refine)
        out.append((i, j, d, asg))
    return out


def pairwise_neuron_distances(
    a_sets: "list[PathSet] | tuple[PathSet, ...]",
    b_sets: "list[PathSet] | tuple[PathSet, ...] | None" = None,
    config: ElasticConfig | None = None,
    *,
    n_jobs: int | None = None,
    refine_ties: bool = False,
    return_assignments: bool = False,
):
    """Distance matrix between neurons.

    With one argument the matrix is square and exactly symmetric (each
    unordered pair is computed once and mirrored, diagonal zero).  With two
    arguments entry (i, j) is the distance from ``a_sets[i]`` to
    ``b_sets[j]``.  Ties in the reported matchings are left to the solver by
    default; totals are unaffected.

    Pairs are independent, so they are spread over ``n_jobs`` joblib workers
    when requested; ``return_assignments`` adds a dict keyed by index pair.
    """
    cfg = config or ElasticConfig()
    a_list = list(a_sets)
    symmetric = b_sets is None
    b_list = None if symmetric else list(b_sets)

    if symmetric:
        n = len(a_list)
        idx_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        idx_pairs = [(i, j) for i in range(len(a_list)) for j in range(len(b_list))]

    jobs = effective_n_jobs(n_jobs) if n_jobs is not None else 1
    if jobs > 1 and len(idx_pairs) > 1:
        blocks = np.array_split(np.arange(len(idx_pairs)), min(jobs * 4, len(idx_pairs)))
        chunked = Parallel(n_jobs=jobs)(
            delayed(_pair_block)(
                a_list, b_list, [idx_pairs[k] for k in blk], cfg, refine_ties
            )
            for blk in blocks
            if len(blk)
        )
        results = [r for block in chunked for r in block]
    else:
        results = _pair_block(a_list, b_list, idx_pairs, cfg, refine_ties)

    if symmetric:
        out = np.zeros((len(a_list), len(a_list)), dtype=np.float64)
    else:
        out = np.empty((len(a_list), len(b_list)), dtype=np.float64)
    assignments: dict[tuple[int, int], Assignment] = {}
    for i, j, d, asg in results:
        out[i, j] = d
        if symmetric:
            out[j, i] = d
        assignments[(i, j)] = asg
    if return_assignments:
        return out, assignments
    return out
