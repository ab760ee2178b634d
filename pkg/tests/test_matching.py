import numpy as np
import pytest

from arbormatch.matching import (
    Assignment,
    cost_matrix,
    hungarian,
    neuron_distance,
    pad_dummy,
    pairwise_neuron_distances,
)
from arbormatch.paths import decompose
from arbormatch.resample import ElasticConfig
from arbormatch.swc import translate_to_origin
from arbormatch.synth import MorphologyParams, synthetic_neuron

from conftest import (
    brute_force_lex_assignment,
    brute_force_min_total,
    sized_tree,
)

CFG = ElasticConfig(rho=40)


def synth_sets(leaves_a=4, leaves_b=6, seed_a=101, seed_b=202):
    pa = MorphologyParams(n_leaves=leaves_a, scale=30.0, steps_min=3, steps_max=5)
    pb = MorphologyParams(n_leaves=leaves_b, scale=35.0, steps_min=3, steps_max=5)
    a = decompose(translate_to_origin(synthetic_neuron(pa, seed_a)), "a")
    b = decompose(translate_to_origin(synthetic_neuron(pb, seed_b)), "b")
    return a, b


def test_cost_matrix_rows_on_smaller_set(small_path_sets):
    a, b = small_path_sets  # 4 and 6 paths
    cm = cost_matrix(a, b, CFG)
    assert cm.shape == (4, 6)
    assert not cm.swapped
    cm_rev = cost_matrix(b, a, CFG)
    assert cm_rev.shape == (4, 6)
    assert cm_rev.swapped
    assert (cm.values == cm_rev.values).all()
    assert (cm.values >= 0).all()


def test_cost_matrix_realistic_scale_shape():
    # path counts straight from two fixed arbors: 28 and 35 terminals
    a = decompose(translate_to_origin(sized_tree(463, 28)), "a")
    b = decompose(translate_to_origin(sized_tree(640, 35, seed=1)), "b")
    cm = cost_matrix(a, b, ElasticConfig(rho=25))
    assert cm.shape == (28, 35)


def test_pad_dummy():
    m = np.arange(6, dtype=np.float64).reshape(2, 3)
    padded = pad_dummy(m)
    assert padded.shape == (3, 3)
    assert (padded[:2] == m).all()
    assert (padded[2] == 0.0).all()
    square = pad_dummy(np.eye(2))
    assert (square == np.eye(2)).all()
    with pytest.raises(ValueError):
        pad_dummy(m.T)


def test_hungarian_identity_and_simple_cases():
    assert hungarian(np.zeros((1, 1))).tolist() == [0]
    assert hungarian(np.eye(3)).tolist() == [1, 0, 2] or (
        np.eye(3)[np.arange(3), hungarian(np.eye(3))].sum() == 0.0
    )
    m = np.array([[1.0, 10.0], [10.0, 1.0]])
    assert hungarian(m).tolist() == [0, 1]


def test_hungarian_matches_brute_force_on_random_matrices(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        m = rng.uniform(0.0, 10.0, size=(n, n))
        perm = hungarian(m)
        total = float(m[np.arange(n), perm].sum())
        assert sorted(perm.tolist()) == list(range(n))
        assert total == pytest.approx(brute_force_min_total(m), abs=1e-9)


def test_hungarian_with_dummy_padding_matches_brute_force(rng):
    for _ in range(100):
        r = int(rng.integers(1, 6))
        c = int(rng.integers(r, 7))
        m = rng.uniform(0.0, 10.0, size=(r, c))
        perm = hungarian(pad_dummy(m))
        total = float(m[np.arange(r), perm[:r]].sum())
        assert total == pytest.approx(brute_force_min_total(m), abs=1e-9)


def test_hungarian_ties_resolve_lexicographically(rng):
    # small integer entries keep float sums exact, so the enumeration oracle
    # and the solver see identical totals
    for _ in range(150):
        n = int(rng.integers(2, 6))
        m = rng.integers(0, 4, size=(n, n)).astype(np.float64)
        assert hungarian(m).tolist() == list(brute_force_lex_assignment(m))


def test_hungarian_all_zero_matrix_assigns_diagonal():
    assert hungarian(np.zeros((4, 4))).tolist() == [0, 1, 2, 3]


def test_hungarian_tie_refinement_keeps_total(rng):
    for _ in range(50):
        n = int(rng.integers(2, 7))
        m = rng.integers(0, 3, size=(n, n)).astype(np.float64)
        fast = hungarian(m, refine_ties=False)
        fine = hungarian(m, refine_ties=True)
        assert m[np.arange(n), fast].sum() == m[np.arange(n), fine].sum()


def test_hungarian_validates_input():
    with pytest.raises(ValueError):
        hungarian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        hungarian(np.array([[np.nan, 1.0], [1.0, 0.0]]))


def test_self_distance_is_exactly_zero(small_path_sets):
    a, _ = small_path_sets
    d, asg = neuron_distance(a, a, CFG)
    assert d == 0.0
    assert asg.total == 0.0
    assert asg.unmatched == ()
    assert all(c == 0.0 for _, _, c in asg.pairs)


def test_neuron_distance_symmetry_is_bit_exact(small_path_sets):
    a, b = small_path_sets
    d_ab, asg_ab = neuron_distance(a, b, CFG)
    d_ba, asg_ba = neuron_distance(b, a, CFG)
    assert d_ab == d_ba
    assert asg_ab.pairs == asg_ba.pairs
    assert asg_ab.swapped != asg_ba.swapped


def test_assignment_is_injective_and_counts_unmatched(small_path_sets):
    a, b = small_path_sets
    _, asg = neuron_distance(a, b, CFG)
    cols = [c for _, c, _ in asg.pairs]
    assert len(cols) == len(set(cols)) == a.n
    assert len(asg.unmatched) == b.n - a.n
    assert set(cols) | set(asg.unmatched) == {p.path_id for p in b.paths}


def test_total_equals_sum_of_matrix_entries_under_assignment(small_path_sets):
    a, b = small_path_sets
    cm = cost_matrix(a, b, CFG)
    d, asg = neuron_distance(a, b, CFG)
    by_id = {(i, j): cm.values[i, j] for i in range(a.n) for j in range(b.n)}
    recomputed = sum(by_id[(i, j)] for i, j, _ in asg.pairs)
    assert d == pytest.approx(recomputed, rel=1e-12)
    assert d == pytest.approx(brute_force_min_total(cm.values), rel=1e-9)


def test_extra_column_never_increases_total(rng):
    # a new candidate column only widens the choice set
    for _ in range(60):
        r = int(rng.integers(1, 5))
        c = int(rng.integers(r, 6))
        m = rng.uniform(0.0, 10.0, size=(r, c))
        base = brute_force_min_total(m)
        extra = np.hstack([m, rng.uniform(0.0, 10.0, size=(r, 1))])
        assert brute_force_min_total(extra) <= base + 1e-12
        perm = hungarian(pad_dummy(extra))
        total = float(extra[np.arange(r), perm[:r]].sum())
        assert total <= base + 1e-12


def test_extra_row_never_decreases_total(rng):
    # with non-negative costs, matching one more real path can only add cost
    for _ in range(60):
        r = int(rng.integers(1, 5))
        c = int(rng.integers(r + 1, 7))
        m = rng.uniform(0.0, 10.0, size=(r, c))
        base = brute_force_min_total(m)
        grown = np.vstack([m, rng.uniform(0.0, 10.0, size=(1, c))])
        assert brute_force_min_total(grown) >= base - 1e-12


def test_pairwise_symmetric_matrix(small_path_sets):
    a, b = small_path_sets
    sets = [a, b, a]
    d = pairwise_neuron_distances(sets, config=CFG)
    assert d.shape == (3, 3)
    assert (np.diag(d) == 0.0).all()
    assert (d == d.T).all()
    assert d[0, 2] == 0.0  # identical neurons
    d_ab, _ = neuron_distance(a, b, CFG)
    assert d[0, 1] == pytest.approx(d_ab, rel=1e-12)


def test_pairwise_rectangular_matches_individual_calls(small_path_sets):
    a, b = small_path_sets
    d = pairwise_neuron_distances([a], [b, a], config=CFG)
    assert d.shape == (1, 2)
    assert d[0, 0] == pytest.approx(neuron_distance(a, b, CFG)[0], rel=1e-12)
    assert d[0, 1] == 0.0


def test_pairwise_parallel_matches_serial(small_path_sets):
    a, b = small_path_sets
    c, _ = synth_sets(leaves_a=5, seed_a=303)
    sets = [a, b, c]
    serial = pairwise_neuron_distances(sets, config=CFG, n_jobs=1)
    parallel = pairwise_neuron_distances(sets, config=CFG, n_jobs=2)
    assert (serial == parallel).all()


def test_pairwise_return_assignments(small_path_sets):
    a, b = small_path_sets
    d, asgs = pairwise_neuron_distances([a, b], config=CFG, return_assignments=True)
    assert set(asgs) == {(0, 1)}
    assert asgs[(0, 1)].total == d[0, 1]
    assert isinstance(asgs[(0, 1)], Assignment)


def test_refine_ties_flag_does_not_change_totals(small_path_sets):
    a, b = small_path_sets
    d_fast, _ = neuron_distance(a, b, CFG, refine_ties=False)
    d_fine, _ = neuron_distance(a, b, CFG, refine_ties=True)
    assert d_fast == pytest.approx(d_fine, rel=1e-12)


def test_empty_path_set_rejected(small_path_sets):
    from arbormatch.paths import PathSet

    a, _ = small_path_sets
    empty = PathSet(neuron_id="empty", paths=())
    with pytest.raises(ValueError):
        cost_matrix(a, empty, CFG)
