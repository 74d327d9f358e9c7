import random

import numpy as np
import pytest

from genie import (AlgorithmConfig, CallCounter, ConditionalPq, DatasetView,
                   MergeHistory, MetricSpace, classic_linkage, cut, genie,
                   hclust, mst_prim, single_linkage)
from genie.errors import (ConfigurationError, InternalConsistencyError,
                          ResourceLimitError)
from genie.evaluation import size_gini_curve
from genie.mst import Mst

import oracles


def _space(X, metric="euclidean"):
    return MetricSpace(DatasetView.from_array(X), metric, CallCounter())


def _partition_sequence(history):
    return [p.copy() for p in history.partitions()]


def _assert_same_sequences(seq_a, seq_b):
    assert len(seq_a) == len(seq_b)
    for a, b in zip(seq_a, seq_b):
        assert oracles.same_partition(a, b)


def test_line_g1_merge_order(line5):
    h = genie(mst_prim(_space(line5)), 5, g=1.0)
    assert h.merges.tolist() == [[1, 2], [6, 3], [7, 4], [8, 5]]
    assert h.heights.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert [g for _, g in size_gini_curve(h)][:4] == pytest.approx([0, 0.2, 0.4, 0.6])
    assert h.to_text() == "-1 -2 1\n1 -3 2\n2 -4 3\n3 -5 4\n"


def test_line_g03_follows_the_merge_rule(line5):
    """At g=0.3 the third merge happens with sizes (3,1,1), Gini 0.4 > g, so
    only edges touching a singleton qualify; the cheapest is (x3, x4) at 3."""
    h = genie(mst_prim(_space(line5)), 5, g=0.3)
    D = oracles.distance_matrix(line5)
    _assert_same_sequences(_partition_sequence(h), oracles.naive_genie(D, 0.3))
    assert cut(h, 2).tolist() == [1, 1, 1, 1, 2]


def test_single_linkage_two_objects():
    h = single_linkage(mst_prim(_space([[0.0], [2.5]])), 2)
    assert h.merges.tolist() == [[1, 2]]
    assert h.heights.tolist() == [2.5]


def test_genie_matches_naive_definition(rng):
    for trial in range(40):
        n = int(rng.integers(2, 40))
        X = rng.normal(size=(n, 2))
        D = oracles.distance_matrix(X)
        g = float(rng.choice([0.1, 0.2, 0.3, 0.5, 0.7]))
        h = genie(mst_prim(_space(X)), n, g)
        _assert_same_sequences(_partition_sequence(h), oracles.naive_genie(D, g))


def test_single_linkage_matches_naive(rng):
    for _ in range(20):
        n = int(rng.integers(2, 60))
        X = rng.normal(size=(n, 3))
        h = single_linkage(mst_prim(_space(X)), n)
        _assert_same_sequences(_partition_sequence(h),
                               oracles.naive_single_partitions(oracles.distance_matrix(X)))


def test_genie_heights_may_invert():
    # a tight pair next to a long chain: the restricted step picks a costly edge
    X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [10.0], [10.05]])
    h = genie(mst_prim(_space(X)), 7, g=0.1)
    assert np.any(np.diff(h.heights) < 0)


def test_genie_validation(line5):
    mst = mst_prim(_space(line5))
    for g in (0.0, -1.0, 1.5):
        with pytest.raises(ConfigurationError):
            genie(mst, 5, g)
    with pytest.raises(InternalConsistencyError):
        genie(Mst(mst.edges[:3], 5), 5, 0.3)


# ConditionalPq ---------------------------------------------------------------


def _key(e):
    return (e[2], e[0], e[1])


def test_conditional_pq_matches_filtered_scan():
    rnd = random.Random(5)
    for _ in range(300):
        m = rnd.randint(1, 40)
        edges = [(rnd.randint(0, 20), rnd.randint(21, 40), float(rnd.randint(0, 6)))
                 for _ in range(m)]
        pq = ConditionalPq(edges)
        remaining = list(edges)
        state = 0
        while remaining:
            mod = rnd.randint(1, 4)
            if rnd.random() < 0.3:
                state += 1
            pred = (lambda e, mod=mod: (e[0] + e[1]) % mod == 0)
            unconditional = rnd.random() < 0.25
            candidates = remaining if unconditional else [e for e in remaining if pred(e)]
            if not candidates:
                with pytest.raises(InternalConsistencyError):
                    pq.pop_conditional(pred, state=("none", state, mod))
                # a failed pop parks everything; the next call must still see it
                continue
            want = min(candidates, key=_key)
            got = pq.pop() if unconditional else pq.pop_conditional(pred, state=(state, mod))
            assert _key(got) == _key(want)
            remaining.remove(want)
            assert len(pq) == len(remaining)


def test_conditional_pq_keeps_park_for_same_state():
    pq = ConditionalPq([(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)])
    e = pq.pop_conditional(lambda e: e.dist > 2.5, state="s")
    assert e.dist == 3.0
    assert pq.parked == 2
    pq.pop_conditional(lambda e: e.dist > 1.5, state="t")   # new state restores
    assert pq.parked == 1
    assert pq.pop().dist == 1.0


def test_pop_empty():
    with pytest.raises(IndexError):
        ConditionalPq().pop()


# classic linkage --------------------------------------------------------------


@pytest.mark.parametrize("scheme", ["single", "complete", "average", "ward"])
def test_identical_pair_merges_first(scheme):
    X = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 0.0]])
    h = classic_linkage(_space(X), scheme)
    assert sorted(h.endpoints[0].tolist()) == [0, 2]


@pytest.mark.parametrize("scheme", ["single", "complete", "average", "ward"])
def test_classic_matches_direct_formula(scheme, rng):
    for _ in range(8):
        n = int(rng.integers(2, 30))
        X = rng.normal(size=(n, 2))
        D = oracles.distance_matrix(X)
        h = classic_linkage(_space(X), scheme)
        want = oracles.naive_classic(D, scheme)
        ds_labels = list(range(n))
        for t, (value, A, B) in enumerate(want):
            i, j = h.endpoints[t].tolist()
            got = {frozenset(x for x in range(n) if ds_labels[x] == ds_labels[i]),
                   frozenset(x for x in range(n) if ds_labels[x] == ds_labels[j])}
            assert got == {A, B}
            assert h.heights[t] == pytest.approx(value, rel=1e-9, abs=1e-12)
            a, b = ds_labels[i], ds_labels[j]
            ds_labels = [a if lab == b else lab for lab in ds_labels]


def test_classic_resource_cap(rng):
    with pytest.raises(ResourceLimitError):
        classic_linkage(_space(rng.normal(size=(30, 2))), "average", max_n=20)
    with pytest.raises(ConfigurationError):
        classic_linkage(_space(rng.normal(size=(3, 2))), "centroid")


def test_classic_single_agrees_with_mst(rng):
    X = rng.normal(size=(50, 2))
    a = classic_linkage(_space(X), "single")
    b = single_linkage(mst_prim(_space(X)), 50)
    _assert_same_sequences(_partition_sequence(a), _partition_sequence(b))


# cut & history -----------------------------------------------------------------


def test_cut_extremes(rng):
    X = rng.normal(size=(12, 2))
    h = hclust(_space(X), algorithm="genie", g=0.3)
    assert cut(h, 1).tolist() == [1] * 12
    assert cut(h, 12).tolist() == list(range(1, 13))
    with pytest.raises(ValueError):
        cut(h, 0)
    with pytest.raises(ValueError):
        cut(h, 13)


def test_cut_labels_by_smallest_member(rng):
    X = rng.normal(size=(40, 2))
    h = hclust(_space(X), algorithm="single")
    for k in range(1, 41):
        lab = cut(h, k)
        assert set(lab.tolist()) == set(range(1, k + 1))
        firsts = [int(np.flatnonzero(lab == c)[0]) for c in range(1, k + 1)]
        assert firsts == sorted(firsts)


def test_history_ids_consumed_once(rng):
    X = rng.normal(size=(30, 2))
    h = hclust(_space(X), algorithm="genie", g=0.2)
    ids = h.merges.ravel().tolist()
    assert len(ids) == len(set(ids))
    assert max(ids) <= 30 + 28


def test_history_text_round_trip(rng):
    X = rng.normal(size=(25, 2))
    h = hclust(_space(X), algorithm="genie", g=0.4)
    back = MergeHistory.from_text(h.to_text())
    assert back.merges.tolist() == h.merges.tolist()
    for k in range(1, 26):
        assert cut(back, k).tolist() == cut(h, k).tolist()


def test_algorithm_config_validation():
    with pytest.raises(ConfigurationError):
        AlgorithmConfig("kmeans")
    with pytest.raises(ConfigurationError):
        AlgorithmConfig("genie", g=0)
    with pytest.raises(ConfigurationError):
        AlgorithmConfig(backend="kd")
    with pytest.raises(ConfigurationError):
        AlgorithmConfig(threads=0)
    assert AlgorithmConfig("genie", 0.25).label == "genie_0.25"
    assert AlgorithmConfig("ward").label == "ward"


@pytest.mark.parametrize("backend", ["prim", "vptree"])
def test_hclust_backends_agree_without_ties(backend, rng):
    X = rng.normal(size=(150, 2))
    ref = hclust(_space(X), algorithm="genie", g=0.3, backend="prim")
    got = hclust(_space(X), algorithm="genie", g=0.3, backend=backend, seed=1)
    assert got.merges.tolist() == ref.merges.tolist()
