"""Corpus handling, nearest-neighbour retrieval, and accuracy evaluation.

A corpus is described by a manifest CSV with columns ``id``,
``relative_path`` (SWC file, resolved against the manifest's directory), and
``label``.  Queries are classified by majority vote among their k nearest
corpus members under the elastic neuron distance; evaluation repeatedly
splits a labeled corpus into cluster (reference) and test sides, stratified
per class, and reports the mean accuracy.  Because the distance matrix is by
far the expensive part it can be cached to CSV and reused across runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ManifestError, StratificationError
from .matching import pairwise_neuron_distances
from .paths import PathSet, as_path_set
from .resample import ElasticConfig

__all__ = [
    "CorpusEntry",
    "CorpusIndex",
    "EvalReport",
    "load_manifest",
    "load_corpus",
    "save_distance_csv",
    "load_distance_csv",
    "corpus_distance_matrix",
    "vote",
    "knn_classify",
    "evaluate",
    "parse_ratio",
]


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    path: Path
    label: str


@dataclass(frozen=True)
class CorpusIndex:
    """Parsed manifest: one entry per neuron, ids unique, order preserved."""

    entries: tuple[CorpusEntry, ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def __len__(self) -> int:
        return len(self.entries)


def load_manifest(manifest_path: "str | Path") -> CorpusIndex:
    """Read a manifest CSV into a CorpusIndex.

    Requires the header columns id, relative_path, label; file paths are
    interpreted relative to the manifest's directory unless absolute.
    """
    mp = Path(manifest_path)
    try:
        fh = open(mp, newline="")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {mp}: {exc.strerror or exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        required = {"id", "relative_path", "label"}
        cols = set(reader.fieldnames or [])
        if not required.issubset(cols):
            raise ManifestError(
                f"manifest {mp} must have columns id, relative_path, label; found "
                f"{sorted(cols) if cols else 'none'}"
            )
        entries: list[CorpusEntry] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            rid = (row["id"] or "").strip()
            rpath = (row["relative_path"] or "").strip()
            label = (row["label"] or "").strip()
            if not rid or not rpath or not label:
                raise ManifestError(f"{mp}:{lineno}: empty id, relative_path, or label")
            if rid in seen:
                raise ManifestError(f"{mp}:{lineno}: duplicate id {rid!r}")
            seen.add(rid)
            p = Path(rpath)
            if not p.is_absolute():
                p = mp.parent / p
            entries.append(CorpusEntry(id=rid, path=p, label=label))
    if not entries:
        raise ManifestError(f"manifest {mp} lists no neurons")
    return CorpusIndex(entries=tuple(entries))


def load_corpus(
    index: CorpusIndex, *, take_largest_root: bool = False
) -> list[PathSet]:
    """Parse every corpus entry into a PathSet (order matches the index)."""
    return [
        as_path_set(str(e.path), take_largest_root=take_largest_root)
        for e in index.entries
    ]


def save_distance_csv(path: "str | Path", ids: "tuple[str, ...] | list[str]", matrix: np.ndarray) -> None:
    """Write a distance matrix keyed by neuron ids."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (len(ids), len(ids)):
        raise ValueError(f"matrix shape {m.shape} does not match {len(ids)} ids")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", *ids])
        for rid, row in zip(ids, m):
            writer.writerow([rid, *(repr(float(v)) for v in row)])


def load_distance_csv(path: "str | Path") -> tuple[tuple[str, ...], np.ndarray]:
    """Read a distance matrix written by save_distance_csv."""
    p = Path(path)
    try:
        fh = open(p, newline="")
    except OSError as exc:
        raise ManifestError(f"cannot read distance cache {p}: {exc.strerror or exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"distance cache {p} is empty") from None
        if not header or header[0] != "id":
            raise ManifestError(f"distance cache {p} has an unexpected header")
        ids = tuple(header[1:])
        rows: list[list[float]] = []
        row_ids: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(ids) + 1:
                raise ManifestError(
                    f"{p}:{lineno}: expected {len(ids) + 1} cells, found {len(row)}"
                )
            row_ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ManifestError(f"{p}:{lineno}: bad number: {exc}") from exc
    if tuple(row_ids) != ids:
        raise ManifestError(f"distance cache {p} row ids do not match its columns")
    matrix = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise ManifestError(f"distance cache {p} contains non-finite values")
    return ids, matrix


def corpus_distance_matrix(
    index: CorpusIndex,
    config: ElasticConfig | None = None,
    *,
    n_jobs: int | None = None,
    cache_path: "str | Path | None" = None,
    take_largest_root: bool = False,
) -> np.ndarray:
    """Full symmetric distance matrix for a corpus, with optional CSV cache.

    An existing cache is reused only if its ids match the manifest exactly
    (same order); anything else raises ManifestError rather than silently
    recomputing, so stale caches get noticed.
    """
    if cache_path is not None and Path(cache_path).exists():
        ids, matrix = load_distance_csv(cache_path)
        if ids != index.ids:
            raise ManifestError(
                f"distance cache {cache_path} does not match the manifest "
                "(different ids or order); delete it to recompute"
            )
        return matrix
    sets = load_corpus(index, take_largest_root=take_largest_root)
    matrix = pairwise_neuron_distances(sets, config=config, n_jobs=n_jobs)
    if cache_path is not None:
        save_distance_csv(cache_path, index.ids, matrix)
    return matrix


def vote(distances: np.ndarray, labels: "list[str] | tuple[str, ...]", k: int) -> str:
    """Majority label among the k nearest entries.

    Candidate ranking is stable (distance, then position).  A tied vote goes
    to the tied class with the smaller summed distance within the k nearest,
    then to the lexicographically smaller label.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or len(d) != len(labels):
        raise ValueError(f"need one distance per label, got {d.shape} vs {len(labels)}")
    if not 1 <= k <= len(d):
        raise ValueError(f"k must be in 1..{len(d)}, got {k}")
    nearest = np.argsort(d, kind="stable")[:k]
    counts: dict[str, int] = {}
    sums: dict[str, float] = {}
    for idx in nearest:
        lab = labels[int(idx)]
        counts[lab] = counts.get(lab, 0) + 1
        sums[lab] = sums.get(lab, 0.0) + float(d[idx])
    return min(counts, key=lambda lab: (-counts[lab], sums[lab], lab))


def knn_classify(
    query,
    cluster: "CorpusIndex | list[PathSet] | tuple[PathSet, ...]",
    k: int = 11,
    config: ElasticConfig | None = None,
    *,
    labels: "list[str] | tuple[str, ...] | None" = None,
    exclude_id: str | None = None,
    n_jobs: int | None = None,
    take_largest_root: bool = False,
) -> str:
    """Label one neuron by majority vote among its k nearest cluster members.

    ``cluster`` is a CorpusIndex (labels come from the manifest) or a
    sequence of PathSet objects with ``labels`` given explicitly.
    ``exclude_id`` drops cluster members with that neuron id before voting,
    so a query that also appears in the cluster set cannot vote for itself.
    """
    if isinstance(cluster, CorpusIndex):
        cluster_sets: list[PathSet] = load_corpus(
            cluster, take_largest_root=take_largest_root
        )
        cluster_labels = list(cluster.labels)
    else:
        cluster_sets = list(cluster)
        if labels is None:
            raise ValueError("labels are required when cluster is not a CorpusIndex")
        cluster_labels = list(labels)
    if len(cluster_sets) != len(cluster_labels):
        raise ValueError("cluster and labels must have the same length")
    if not cluster_sets:
        raise ValueError("cluster set is empty")
    qset = as_path_set(query, take_largest_root=take_largest_root)
    keep = [
        i for i, s in enumerate(cluster_sets)
        if exclude_id is None or s.neuron_id != exclude_id
    ]
    if not keep:
        raise ValueError("no cluster members left after exclusion")
    kept_sets = [cluster_sets[i] for i in keep]
    kept_labels = [cluster_labels[i] for i in keep]
    row = pairwise_neuron_distances([qset], kept_sets, config=config, n_jobs=n_jobs)[0]
    return vote(row, kept_labels, k)


def _stratified_split(
    labels: np.ndarray, cluster_fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random per-class split into cluster and test indices."""
    cluster: list[np.ndarray] = []
    test: list[np.ndarray] = []
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        perm = rng.permutation(idx)
        n_cluster = int(round(cluster_fraction * len(idx)))
        if n_cluster == 0:
            raise StratificationError(
                f"class {cls!r} has no cluster members at fraction "
                f"{cluster_fraction} ({len(idx)} neurons)"
            )
        cluster.append(perm[:n_cluster])
        test.append(perm[n_cluster:])
    cluster_idx = np.sort(np.concatenate(cluster))
    test_idx = np.sort(np.concatenate(test)) if any(len(t) for t in test) else np.array([], dtype=np.int64)
    if len(test_idx) == 0:
        raise StratificationError(
            f"cluster fraction {cluster_fraction} leaves no test neurons"
        )
    return cluster_idx, test_idx


@dataclass(frozen=True)
class EvalReport:
    """Retrieval accuracy over repeated stratified splits."""

    cluster_fraction: float
    repeats: int
    k: int
    seed: int
    n_neurons: int
    classes: tuple[str, ...]
    accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    def to_dict(self) -> dict:
        return {
            "cluster_fraction": self.cluster_fraction,
            "repeats": self.repeats,
            "k": self.k,
            "seed": self.seed,
            "n_neurons": self.n_neurons,
            "classes": list(self.classes),
            "accuracies": list(self.accuracies),
            "mean_accuracy": self.mean_accuracy,
        }


def parse_ratio(text: str) -> float:
    """Cluster fraction from 'C:T' (e.g. '9:1' -> 0.9) or a plain fraction."""
    s = text.strip()
    try:
        if ":" in s:
            left, right = s.split(":", 1)
            c, t = float(left), float(right)
            if c <= 0 or t < 0 or c + t <= 0:
                raise ValueError
            fraction = c / (c + t)
        else:
            fraction = float(s)
    except ValueError:
        raise ValueError(f"cannot parse ratio {text!r}; expected like '9:1' or '0.9'") from None
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"ratio {text!r} must leave both sides non-empty")
    return fraction


def evaluate(
    index: CorpusIndex,
    cluster_fraction: float,
    repeats: int = 5,
    k: int = 11,
    seed: int = 0,
    config: ElasticConfig | None = None,
    *,
    n_jobs: int | None = None,
    cache_path: "str | Path | None" = None,
    take_largest_root: bool = False,
) -> EvalReport:
    """Mean retrieval accuracy over repeated random stratified splits.

    Each repeat assigns ``cluster_fraction`` of every class to the cluster
    (reference) side and classifies the remaining neurons by k nearest
    neighbours; the distance matrix is computed once (or read from
    ``cache_path``) and shared by all repeats.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if not 0.0 < cluster_fraction < 1.0:
        raise ValueError(f"cluster_fraction must be in (0, 1), got {cluster_fraction}")
    matrix = corpus_distance_matrix(
        index,
        config,
        n_jobs=n_jobs,
        cache_path=cache_path,
        take_largest_root=take_largest_root,
    )
    labels = np.asarray(index.labels, dtype=object)
    rng = np.random.default_rng(seed)
    accuracies: list[float] = []
    for _ in range(repeats):
        cluster_idx, test_idx = _stratified_split(labels, cluster_fraction, rng)
        if k > len(cluster_idx):
            raise ValueError(
                f"k={k} exceeds the cluster-set size {len(cluster_idx)}"
            )
        cluster_labels = [str(lab) for lab in labels[cluster_idx]]
        correct = 0
        for t in test_idx:
            predicted = vote(matrix[t, cluster_idx], cluster_labels, k)
            if predicted == labels[t]:
                correct += 1
        accuracies.append(correct / len(test_idx))
    return EvalReport(
        cluster_fraction=cluster_fraction,
        repeats=repeats,
        k=k,
        seed=seed,
        n_neurons=len(index),
        classes=index.classes,
        accuracies=tuple(accuracies),
    )
