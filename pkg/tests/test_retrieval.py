import numpy as np
import pytest

from arbormatch.errors import ManifestError, StratificationError
from arbormatch.resample import ElasticConfig
from arbormatch.retrieval import (
    CorpusIndex,
    corpus_distance_matrix,
    evaluate,
    knn_classify,
    load_distance_csv,
    load_manifest,
    parse_ratio,
    save_distance_csv,
    vote,
    _stratified_split,
)
from arbormatch.synth import MorphologyParams, synthetic_corpus

CFG = ElasticConfig(rho=30)

TINY_CLASSES = {
    "slim": MorphologyParams(n_leaves=3, scale=15.0, steps_min=3, steps_max=5),
    "wide": MorphologyParams(n_leaves=7, scale=150.0, steps_min=3, steps_max=5),
}


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    manifest = synthetic_corpus(root, per_class=4, seed=1, classes=TINY_CLASSES)
    return load_manifest(manifest), manifest


def test_load_manifest_basic(tiny_corpus):
    index, manifest = tiny_corpus
    assert len(index) == 8
    assert index.classes == ("slim", "wide")
    assert len(set(index.ids)) == 8
    for e in index.entries:
        assert e.path.is_absolute() or e.path.exists()
        assert e.path.exists()


def test_load_manifest_missing_file(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "nowhere.csv")


def test_load_manifest_requires_columns(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("id,path,label\na,x.swc,l\n")
    with pytest.raises(ManifestError) as exc:
        load_manifest(p)
    assert "relative_path" in str(exc.value)


def test_load_manifest_rejects_empty_fields_with_line(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("id,relative_path,label\nn1,a.swc,slim\nn2,,slim\n")
    with pytest.raises(ManifestError) as exc:
        load_manifest(p)
    assert ":3:" in str(exc.value)


def test_load_manifest_rejects_duplicate_ids(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("id,relative_path,label\nn1,a.swc,slim\nn1,b.swc,slim\n")
    with pytest.raises(ManifestError, match="duplicate"):
        load_manifest(p)


def test_load_manifest_rejects_empty_manifest(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("id,relative_path,label\n")
    with pytest.raises(ManifestError, match="no neurons"):
        load_manifest(p)


def test_distance_csv_round_trip(tmp_path):
    ids = ("a", "b", "c")
    m = np.array([[0.0, 1.25, 2.5], [1.25, 0.0, 0.125], [2.5, 0.125, 0.0]])
    f = tmp_path / "d.csv"
    save_distance_csv(f, ids, m)
    ids2, m2 = load_distance_csv(f)
    assert ids2 == ids
    assert (m2 == m).all()  # repr round-trip keeps doubles exact


def test_distance_csv_validation(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("id,a,b\na,0.0\n")
    with pytest.raises(ManifestError, match="cells"):
        load_distance_csv(f)
    f.write_text("id,a,b\na,0.0,1.0\nc,1.0,0.0\n")
    with pytest.raises(ManifestError, match="row ids"):
        load_distance_csv(f)
    f.write_text("id,a,b\na,0.0,nan\nb,1.0,0.0\n")
    with pytest.raises(ManifestError, match="non-finite"):
        load_distance_csv(f)
    f.write_text("wrong,a\na,0.0\n")
    with pytest.raises(ManifestError, match="header"):
        load_distance_csv(f)
    with pytest.raises(ManifestError):
        load_distance_csv(tmp_path / "missing.csv")
    f.write_text("")
    with pytest.raises(ManifestError, match="empty"):
        load_distance_csv(f)


def test_corpus_distance_matrix_and_cache(tiny_corpus, tmp_path):
    index, _ = tiny_corpus
    cache = tmp_path / "cache.csv"
    m1 = corpus_distance_matrix(index, CFG, cache_path=cache)
    assert cache.exists()
    assert m1.shape == (8, 8)
    assert (np.diag(m1) == 0.0).all()
    assert (m1 == m1.T).all()
    m2 = corpus_distance_matrix(index, CFG, cache_path=cache)
    assert (m1 == m2).all()


def test_corpus_distance_matrix_rejects_stale_cache(tiny_corpus, tmp_path):
    index, _ = tiny_corpus
    cache = tmp_path / "stale.csv"
    save_distance_csv(cache, ("x", "y"), np.zeros((2, 2)))
    with pytest.raises(ManifestError, match="delete it to recompute"):
        corpus_distance_matrix(index, CFG, cache_path=cache)


def test_vote_majority():
    d = np.array([0.1, 0.2, 0.3, 9.0])
    assert vote(d, ["a", "a", "b", "b"], 3) == "a"
    assert vote(d, ["a", "b", "b", "b"], 3) == "b"


def test_vote_tie_breaks_on_summed_distance_then_label():
    d = np.array([0.1, 0.4, 0.2, 0.25])
    # 2 votes each; sum(a) = 0.5, sum(b) = 0.45 -> b
    assert vote(d, ["a", "a", "b", "b"], 4) == "b"
    d_eq = np.array([0.1, 0.2, 0.1, 0.2])
    # equal counts and equal sums -> lexicographically smaller label
    assert vote(d_eq, ["b", "b", "a", "a"], 4) == "a"


def test_vote_k_one_takes_nearest():
    assert vote(np.array([3.0, 1.0, 2.0]), ["x", "y", "z"], 1) == "y"


def test_vote_tied_distances_use_position_order():
    d = np.zeros(4)
    assert vote(d, ["c", "c", "d", "d"], 3) == "c"


def test_vote_validation():
    with pytest.raises(ValueError):
        vote(np.array([1.0, 2.0]), ["a"], 1)
    with pytest.raises(ValueError):
        vote(np.array([1.0, 2.0]), ["a", "b"], 0)
    with pytest.raises(ValueError):
        vote(np.array([1.0, 2.0]), ["a", "b"], 3)


def test_knn_classify_with_corpus_index(tiny_corpus):
    index, _ = tiny_corpus
    # classifying a corpus member against the corpus must return its label
    entry = index.entries[0]
    got = knn_classify(str(entry.path), index, k=1, config=CFG)
    assert got == entry.label


def test_knn_classify_excludes_identical_id(tiny_corpus):
    index, _ = tiny_corpus
    entry = index.entries[0]
    # with k=1 and the query excluded, the nearest remaining member of the
    # same class should still win on a well-separated corpus
    got = knn_classify(
        str(entry.path), index, k=1, config=CFG, exclude_id=entry.id
    )
    assert got == entry.label


def test_knn_classify_needs_labels_for_raw_sets(tiny_corpus):
    from arbormatch.retrieval import load_corpus

    index, _ = tiny_corpus
    sets = load_corpus(index)
    with pytest.raises(ValueError):
        knn_classify(sets[0], sets, k=1, config=CFG)
    got = knn_classify(sets[0], sets, k=1, config=CFG, labels=list(index.labels))
    assert got == index.labels[0]


def test_stratified_split_covers_classes():
    labels = np.asarray(["a"] * 10 + ["b"] * 10, dtype=object)
    rng = np.random.default_rng(0)
    cluster, test = _stratified_split(labels, 0.9, rng)
    assert len(cluster) == 18 and len(test) == 2
    assert set(labels[cluster]) == {"a", "b"}
    assert set(cluster.tolist()) | set(test.tolist()) == set(range(20))
    assert not set(cluster.tolist()) & set(test.tolist())


def test_stratified_split_errors():
    labels = np.asarray(["a"] * 4 + ["b"] * 4, dtype=object)
    rng = np.random.default_rng(0)
    with pytest.raises(StratificationError):
        _stratified_split(labels, 0.05, rng)  # a class loses all cluster members
    with pytest.raises(StratificationError):
        _stratified_split(labels, 0.99, rng)  # nothing left to test


def test_parse_ratio():
    assert parse_ratio("9:1") == pytest.approx(0.9)
    assert parse_ratio("3:1") == pytest.approx(0.75)
    assert parse_ratio("1:1") == pytest.approx(0.5)
    assert parse_ratio("0.8") == pytest.approx(0.8)
    assert parse_ratio(" 9 : 1 ") == pytest.approx(0.9)
    for bad in ("", "x", "9:", "0:1", "1:0:", "-1:2", "1.5", "0", "1"):
        with pytest.raises(ValueError):
            parse_ratio(bad)


def test_evaluate_on_separated_corpus(tiny_corpus):
    index, _ = tiny_corpus
    report = evaluate(index, 0.75, repeats=3, k=1, seed=4, config=CFG)
    assert report.repeats == 3
    assert len(report.accuracies) == 3
    assert report.mean_accuracy == 1.0
    assert report.n_neurons == 8
    assert report.classes == ("slim", "wide")
    d = report.to_dict()
    assert d["mean_accuracy"] == 1.0
    assert d["accuracies"] == [1.0, 1.0, 1.0]
    # classes this far apart stay perfectly separable with a wider vote too
    assert evaluate(index, 0.75, repeats=3, k=3, seed=4, config=CFG).mean_accuracy == 1.0


def test_evaluate_is_deterministic(tiny_corpus):
    index, _ = tiny_corpus
    r1 = evaluate(index, 0.75, repeats=2, k=1, seed=9, config=CFG)
    r2 = evaluate(index, 0.75, repeats=2, k=1, seed=9, config=CFG)
    assert r1.accuracies == r2.accuracies


def test_evaluate_uses_cache(tiny_corpus, tmp_path):
    index, _ = tiny_corpus
    cache = tmp_path / "c.csv"
    r1 = evaluate(index, 0.75, repeats=2, k=1, seed=2, config=CFG, cache_path=cache)
    assert cache.exists()
    assert r1.mean_accuracy == 1.0
    # invert the geometry in the cache: nearest becomes farthest, so a true
    # cache hit must flip every verdict
    ids, m = load_distance_csv(cache)
    off = ~np.eye(len(ids), dtype=bool)
    inverted = np.where(off, m.max() + 1.0 - m, 0.0)
    save_distance_csv(cache, ids, inverted)
    r2 = evaluate(index, 0.75, repeats=2, k=1, seed=2, config=CFG, cache_path=cache)
    assert r2.mean_accuracy < r1.mean_accuracy


def test_evaluate_relabeling_classes_preserves_accuracy(tiny_corpus, tmp_path):
    # order-preserving rename: splits stay identical, verdicts map one-to-one
    import csv

    index, manifest = tiny_corpus
    m2 = tmp_path / "renamed.csv"
    with open(m2, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "relative_path", "label"])
        for e in index.entries:
            writer.writerow([e.id, str(e.path), e.label + "_renamed"])
    index2 = load_manifest(m2)
    assert index2.classes == ("slim_renamed", "wide_renamed")
    r1 = evaluate(index, 0.75, repeats=2, k=3, seed=5, config=CFG)
    r2 = evaluate(index2, 0.75, repeats=2, k=3, seed=5, config=CFG)
    assert r1.accuracies == r2.accuracies


def test_evaluate_validation(tiny_corpus):
    index, _ = tiny_corpus
    with pytest.raises(ValueError):
        evaluate(index, 0.75, repeats=0, config=CFG)
    with pytest.raises(ValueError):
        evaluate(index, 1.5, config=CFG)
    with pytest.raises(ValueError):
        evaluate(index, 0.75, repeats=1, k=50, config=CFG)
