"""Command line interface.

Machine-readable results (JSON or CSV) go to stdout or ``--out``; human
summaries go to stderr.  Exit codes: 0 on success, 1 for usage problems
(unknown flags, unparseable values, impossible parameter combinations), 2
for data problems (unreadable files, malformed SWC or manifests), with the
offending file and line named in the message.

``ARBORMATCH_RHO`` and ``ARBORMATCH_LAMBDA`` override the built-in defaults
for the resampling floor and the cost denominator constant; explicit flags
win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .elastic import morph, register, srv_transform
from .errors import ArborMatchError, ManifestError
from .matching import cost_matrix, neuron_distance, pairwise_neuron_distances
from .paths import PathSet, as_path_set
from .resample import ElasticConfig, pair_target, resample
from .retrieval import (
    corpus_distance_matrix,
    evaluate,
    load_corpus,
    load_manifest,
    parse_ratio,
    vote,
)
from .swc import build_tree, read_swc, translate_to_origin
from .synth import CLASS_PRESETS, synthetic_corpus

ENV_RHO = "ARBORMATCH_RHO"
ENV_LAMBDA = "ARBORMATCH_LAMBDA"


class _Parser(argparse.ArgumentParser):
    """argparse ends usage errors with status 2; this project reserves 2 for
    data errors, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _rho_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rho list {text!r}") from None
    if not values or any(v < 2 for v in values):
        raise argparse.ArgumentTypeError(f"rho values must be >= 2, got {text!r}")
    return values


def _elastic_config(args: argparse.Namespace) -> ElasticConfig:
    rho = getattr(args, "rho", None)
    lam = getattr(args, "lam", None)
    try:
        if rho is None:
            rho = int(os.environ.get(ENV_RHO, 100))
        if lam is None:
            lam = float(os.environ.get(ENV_LAMBDA, 1.0))
        return ElasticConfig(rho=rho, lam=lam, frames=getattr(args, "frames", 10))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


class _UsageError(Exception):
    """Invalid flag or environment values; exits with status 1."""


def _emit(text: str, out: "str | None") -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _load(args: argparse.Namespace, attr: str) -> PathSet:
    return as_path_set(
        getattr(args, attr), take_largest_root=getattr(args, "take_largest_root", False)
    )


# ---------------------------------------------------------------- subcommands


def cmd_parse(args) -> int:
    records = read_swc(args.file)
    tree = build_tree(records, take_largest_root=args.take_largest_root, path=args.file)
    non_root = np.flatnonzero(tree.parents >= 0)
    seg = tree.positions[non_root] - tree.positions[tree.parents[non_root]]
    summary = {
        "file": str(args.file),
        "samples": len(records),
        "vertices": tree.n_vertices,
        "root_id": int(tree.ids[tree.root]),
        "leaves": tree.n_leaves,
        "paths": tree.n_leaves,
        "total_length_um": float(np.linalg.norm(seg, axis=1).sum()),
    }
    _emit(_json_dump(summary), args.out)
    return 0


def cmd_paths(args) -> int:
    ps = _load(args, "file")
    doc = {
        "neuron_id": ps.neuron_id,
        "n_paths": ps.n,
        "paths": [
            {
                "path_id": p.path_id,
                "vertex_ids": list(p.vertex_ids),
                "positions": [[float(c) for c in row] for row in p.positions],
                "concurrence": [int(v) for v in p.concurrence],
                "hierarchy": [int(v) for v in p.hierarchy],
            }
            for p in ps.paths
        ],
    }
    _emit(_json_dump(doc), args.out)
    _info(f"{ps.neuron_id or args.file}: {ps.n} root-to-leaf paths")
    return 0


def cmd_distance(args) -> int:
    cfg = _elastic_config(args)
    a = _load(args, "file_a")
    b = _load(args, "file_b")
    d, _ = neuron_distance(a, b, cfg)
    if args.per_path:
        cm = cost_matrix(a, b, cfg)
        rows, cols = (b, a) if cm.swapped else (a, b)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            [f"rows={'b' if cm.swapped else 'a'}", *(p.path_id for p in cols.paths)]
        )
        for p, row in zip(rows.paths, cm.values):
            writer.writerow([p.path_id, *(repr(float(v)) for v in row)])
        Path(args.per_path).write_text(buf.getvalue())
    print(d)
    _info(
        f"{args.file_a} ({a.n} paths) vs {args.file_b} ({b.n} paths), "
        f"rho={cfg.rho}, lambda={cfg.lam}"
    )
    return 0


def cmd_match(args) -> int:
    cfg = _elastic_config(args)
    a = _load(args, "file_a")
    b = _load(args, "file_b")
    d, asg = neuron_distance(a, b, cfg)
    doc = {
        "neuron_a": args.file_a,
        "neuron_b": args.file_b,
        "rows": "b" if asg.swapped else "a",
        "pairs": [
            {"row": i, "col": j, "cost": cost} for i, j, cost in asg.pairs
        ],
        "unmatched": list(asg.unmatched),
        "total": d,
    }
    _emit(_json_dump(doc), args.out)
    _info(
        f"matched {len(asg.pairs)} path pair(s), {len(asg.unmatched)} unmatched, "
        f"total {d:g}"
    )
    return 0


def cmd_morph(args) -> int:
    cfg = _elastic_config(args)
    a = _load(args, "file_a")
    b = _load(args, "file_b")
    _, asg = neuron_distance(a, b, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # per matched pair: shared grid, SRV, register source onto target, blend
    frames_rows: list[list[list]] = [[] for _ in range(cfg.frames)]
    for row, col, _cost in asg.pairs:
        a_pid, b_pid = (col, row) if asg.swapped else (row, col)
        pa, pb = a.paths[a_pid], b.paths[b_pid]
        m = pair_target(len(pa), len(pb), cfg.rho)
        qa = srv_transform(resample(pa, m))
        qb = srv_transform(resample(pb, m))
        qa_reg = register(qa, qb)
        for f, pts in enumerate(morph(qa_reg, qb, cfg.frames)):
            frames_rows[f].extend(
                [f, a_pid, k, float(x), float(y), float(z)]
                for k, (x, y, z) in enumerate(pts)
            )

    width = len(str(cfg.frames - 1))
    for f, rows in enumerate(frames_rows):
        with open(out_dir / f"frame_{f:0{width}d}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "path", "sample", "x", "y", "z"])
            writer.writerows(rows)
    _info(
        f"wrote {cfg.frames} frame file(s) for {len(asg.pairs)} matched pair(s) "
        f"to {out_dir}"
    )
    return 0


def cmd_distmat(args) -> int:
    files = sorted(Path(args.dir).glob("*.swc"))
    if not files:
        raise ManifestError(f"no .swc files in {args.dir}")
    sets = [
        as_path_set(str(f), take_largest_root=args.take_largest_root) for f in files
    ]
    cfg = _elastic_config(args)
    matrix = pairwise_neuron_distances(sets, config=cfg, n_jobs=args.jobs)
    names = [f.stem for f in files]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["id", *names])
    for name, row in zip(names, matrix):
        writer.writerow([name, *(repr(float(v)) for v in row)])
    _emit(buf.getvalue(), args.out)
    _info(f"{len(files)} neurons, rho={cfg.rho}, lambda={cfg.lam}")
    return 0


def cmd_classify(args) -> int:
    cfg = _elastic_config(args)
    cluster = load_manifest(args.cluster)
    query = load_manifest(args.query)
    cluster_sets = load_corpus(cluster, take_largest_root=args.take_largest_root)
    query_sets = load_corpus(query, take_largest_root=args.take_largest_root)
    cluster_ids = cluster.ids
    labels = cluster.labels

    matrix = pairwise_neuron_distances(query_sets, cluster_sets, cfg, n_jobs=args.jobs)
    results: list[tuple[str, str]] = []
    for qi, entry in enumerate(query.entries):
        keep = [ci for ci, cid in enumerate(cluster_ids) if cid != entry.id]
        if len(keep) < args.k:
            raise _UsageError(
                f"k={args.k} exceeds the {len(keep)} usable cluster neurons "
                f"for query {entry.id!r}"
            )
        row = matrix[qi, keep]
        results.append((entry.id, vote(row, [labels[c] for c in keep], args.k)))

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["id", "label"])
    writer.writerows(results)
    _emit(buf.getvalue(), args.out)
    _info(f"classified {len(results)} neuron(s) against {len(cluster)} (k={args.k})")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _elastic_config(args)
    index = load_manifest(args.corpus)
    try:
        fraction = parse_ratio(args.ratio)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    try:
        report = evaluate(
            index,
            fraction,
            repeats=args.repeats,
            k=args.k,
            seed=args.seed,
            config=cfg,
            n_jobs=args.jobs,
            cache_path=args.cache,
            take_largest_root=args.take_largest_root,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    doc = {"ratio": args.ratio, **report.to_dict()}
    _emit(_json_dump(doc), args.out)
    _info(
        f"mean accuracy {report.mean_accuracy:.4f} over {report.repeats} split(s) "
        f"of {report.n_neurons} neurons"
    )
    return 0


def bench_rho(
    a: PathSet,
    b: PathSet,
    rho_values: "list[int]",
    lam: float = 1.0,
    repeats: int = 1,
) -> list[tuple[int, float, float]]:
    """Distance and wall time per rho value; min over ``repeats`` runs.

    Matching ties are not refined here, so the timing reflects the metric
    pipeline itself.  A warm-up run precedes timing.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    neuron_distance(a, b, ElasticConfig(rho=min(rho_values), lam=lam), refine_ties=False)
    rows: list[tuple[int, float, float]] = []
    for rho in rho_values:
        cfg = ElasticConfig(rho=rho, lam=lam)
        best = float("inf")
        d = 0.0
        for _ in range(repeats):
            t0 = time.perf_counter()
            d, _ = neuron_distance(a, b, cfg, refine_ties=False)
            best = min(best, time.perf_counter() - t0)
        rows.append((rho, d, best))
    return rows


def cmd_bench_rho(args) -> int:
    lam = getattr(args, "lam", None)
    if lam is None:
        try:
            lam = float(os.environ.get(ENV_LAMBDA, 1.0))
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    a = _load(args, "file_a")
    b = _load(args, "file_b")
    rows = bench_rho(a, b, args.rho_list, lam=lam, repeats=args.repeats)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["rho", "distance", "seconds"])
    for rho, d, seconds in rows:
        writer.writerow([rho, repr(d), f"{seconds:.6f}"])
    _emit(buf.getvalue(), args.out)
    _info(f"timed {len(rows)} rho value(s), min over {args.repeats} run(s) each")
    return 0


def cmd_synth(args) -> int:
    presets = CLASS_PRESETS
    if args.classes:
        missing = [c for c in args.classes if c not in CLASS_PRESETS]
        if missing:
            raise _UsageError(
                f"unknown class(es) {', '.join(missing)}; "
                f"available: {', '.join(sorted(CLASS_PRESETS))}"
            )
        presets = {c: CLASS_PRESETS[c] for c in args.classes}
    manifest = synthetic_corpus(
        args.out, per_class=args.per_class, seed=args.seed, classes=presets
    )
    print(manifest)
    _info(
        f"wrote {len(presets) * args.per_class} neurons "
        f"({len(presets)} classes x {args.per_class}) under {args.out}"
    )
    return 0


# -------------------------------------------------------------------- parser


def _add_elastic_flags(p: argparse.ArgumentParser, frames: bool = False) -> None:
    p.add_argument("--rho", type=int, default=None,
                   help=f"resampling floor (default 100, env {ENV_RHO})")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help=f"cost denominator constant (default 1.0, env {ENV_LAMBDA})")
    if frames:
        p.add_argument("--frames", type=_positive_int, default=10,
                       help="morph frames to emit (default 10)")


def _add_root_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--take-largest-root", action="store_true",
                   help="accept multi-root SWC files by keeping the largest tree")


def _add_jobs_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=-1,
                   help="parallel workers for pairwise distances (default: all)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arbormatch",
                     description="Elastic path-matching distances between neuron reconstructions.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("parse", parents=[], help="validate an SWC file and summarize it",
                       add_help=True)
    p.add_argument("file")
    _add_root_flag(p)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("paths", help="decompose a neuron into root-to-leaf paths")
    p.add_argument("file")
    _add_root_flag(p)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("distance", help="elastic distance between two neurons")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _add_elastic_flags(p)
    _add_root_flag(p)
    p.add_argument("--per-path", default=None, metavar="CSV",
                   help="also write the full path-pair cost matrix")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("match", help="optimal path pairing between two neurons")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _add_elastic_flags(p)
    _add_root_flag(p)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("morph", help="write frame CSVs deforming one neuron into another")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    _add_elastic_flags(p, frames=True)
    _add_root_flag(p)
    p.set_defaults(func=cmd_morph)

    p = sub.add_parser("distmat", help="pairwise distance matrix for a directory of SWC files")
    p.add_argument("dir")
    _add_elastic_flags(p)
    _add_root_flag(p)
    _add_jobs_flag(p)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("classify", help="label query neurons by k nearest corpus members")
    p.add_argument("--cluster", required=True, metavar="MANIFEST")
    p.add_argument("--query", required=True, metavar="MANIFEST")
    p.add_argument("--k", type=_positive_int, default=11)
    _add_elastic_flags(p)
    _add_root_flag(p)
    _add_jobs_flag(p)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="retrieval accuracy over stratified random splits")
    p.add_argument("--corpus", required=True, metavar="MANIFEST")
    p.add_argument("--ratio", default="9:1", help="cluster:test ratio (default 9:1)")
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--k", type=_positive_int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache", default=None, metavar="CSV",
                   help="reuse or create a distance matrix cache")
    _add_elastic_flags(p)
    _add_root_flag(p)
    _add_jobs_flag(p)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench-rho", help="time the distance at several resampling floors")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--rho-list", type=_rho_list, default=[25, 50, 100, 200, 400],
                   metavar="R1,R2,...")
    p.add_argument("--repeats", type=_positive_int, default=1,
                   help="timing runs per rho; the minimum is reported")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _add_root_flag(p)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_bench_rho)

    p = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--per-class", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", default=None,
                   type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                   help="comma-separated subset of preset classes")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse help or usage exit
        code = exc.code
        return code if isinstance(code, int) else 1
    except _UsageError as exc:
        print(f"arbormatch: error: {exc}", file=sys.stderr)
        return 1
    except ArborMatchError as exc:
        print(f"arbormatch: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"arbormatch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
