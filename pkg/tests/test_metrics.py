import threading

import numpy as np
import pytest

from genie import CallCounter, DatasetView, MetricSpace, dissimilarity
from genie.errors import ConfigurationError
from genie.metrics import METRICS, levenshtein

import oracles


def test_euclidean_unit_pair():
    view = DatasetView.from_array([[0.0], [1.0]])
    c = CallCounter()
    assert dissimilarity(view, "euclidean", 0, 1, c) == 1.0
    assert c.count == 1


@pytest.mark.parametrize("name", ["euclidean", "manhattan", "maximum", "hamming"])
def test_identity_is_zero_numeric(name, rng):
    view = DatasetView.from_array(rng.normal(size=(4, 3)))
    assert dissimilarity(view, name, 2, 2, CallCounter()) == 0.0


def test_identity_is_zero_strings():
    view = DatasetView.from_strings(["acgt", "tt"])
    assert dissimilarity(view, "levenshtein", 0, 0, CallCounter()) == 0.0


def test_levenshtein_examples():
    assert levenshtein("actg", "atg") == 1
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == 3


def test_levenshtein_against_recursive_oracle(rng):
    alphabet = "actg"
    for _ in range(200):
        a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 8)))
        b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 8)))
        assert levenshtein(a, b) == oracles.levenshtein(a, b)


def test_hamming_strings():
    view = DatasetView.from_strings(["0011", "0101"])
    assert dissimilarity(view, "hamming", 0, 1, CallCounter()) == 2


def test_hamming_unequal_lengths_rejected():
    view = DatasetView.from_strings(["0011", "01"])
    with pytest.raises(ConfigurationError):
        MetricSpace(view, "hamming")


def test_kind_mismatch():
    num = DatasetView.from_array([[0.0], [1.0]])
    with pytest.raises(ConfigurationError):
        dissimilarity(num, "levenshtein", 0, 1, CallCounter())
    with pytest.raises(ConfigurationError):
        MetricSpace(DatasetView.from_strings(["a", "b"]), "euclidean")


def test_unknown_metric():
    with pytest.raises(ConfigurationError):
        MetricSpace(DatasetView.from_array([[0.0]]), "cosine")


def test_non_finite_rejected():
    with pytest.raises(ConfigurationError):
        DatasetView.from_array([[0.0], [np.nan]])


@pytest.mark.parametrize("name", ["euclidean", "manhattan", "maximum"])
def test_matches_matrix_oracle(name, rng):
    X = rng.normal(size=(30, 5))
    D = oracles.distance_matrix(X, name)
    space = MetricSpace(DatasetView.from_array(X), name)
    for i in range(30):
        for j in range(30):
            assert space.d(i, j) == pytest.approx(D[i, j], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("m", [5, 40, 300])
@pytest.mark.parametrize("name", ["euclidean", "manhattan", "maximum", "hamming"])
def test_block_kernel_bitwise_equal_to_scalar(name, m, rng):
    X = rng.integers(0, 3, size=(m, 37)).astype(float) if name == "hamming" \
        else rng.normal(size=(m, 37))
    space = MetricSpace(DatasetView.from_array(X), name)
    many = space.d_many(3, np.arange(m))
    scalar = np.array([space.d(3, j) for j in range(m)])
    assert np.array_equal(many, scalar)


def _triples(rng, n, count=1000):
    return rng.integers(0, n, size=(count, 3))


@pytest.mark.parametrize("name", ["euclidean", "manhattan", "maximum", "hamming"])
def test_symmetry_and_triangle_numeric(name, rng):
    X = rng.integers(0, 4, size=(60, 6)).astype(float) if name == "hamming" \
        else rng.normal(size=(60, 6))
    space = MetricSpace(DatasetView.from_array(X), name)
    eps = 0 if METRICS[name].integer_valued else 1e-9
    for x, y, z in _triples(rng, 60):
        assert space.d(x, y) == space.d(y, x)
        assert space.d(x, y) <= space.d(x, z) + space.d(z, y) + eps


@pytest.mark.parametrize("name", ["levenshtein", "hamming"])
def test_symmetry_and_triangle_strings(name, rng):
    fixed = name == "hamming"
    strings = ["".join(rng.choice(list("actg"), size=10 if fixed else rng.integers(1, 12)))
               for _ in range(40)]
    space = MetricSpace(DatasetView.from_strings(strings), name)
    for x, y, z in _triples(rng, 40):
        assert space.d(x, y) == space.d(y, x)
        assert space.d(x, y) <= space.d(x, z) + space.d(z, y)


def test_counter_exact_over_all_pairs(rng):
    n = 37
    space = MetricSpace(DatasetView.from_array(rng.normal(size=(n, 2))))
    for i in range(n):
        for j in range(i + 1, n):
            space.d(i, j)
    assert space.calls == (n * n - n) // 2
    space.d_many(0, np.arange(5))
    assert space.calls == (n * n - n) // 2 + 5


def test_counter_concurrent_increments():
    c = CallCounter()

    def work():
        for _ in range(10000):
            c.add(1)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.count == 80000
    c.reset()
    assert c.count == 0


def test_view_is_read_only_and_take(rng):
    X = rng.normal(size=(5, 2))
    view = DatasetView.from_array(X)
    with pytest.raises(ValueError):
        view.data[0, 0] = 1.0
    sub = view.take([4, 0])
    assert np.array_equal(sub.data, X[[4, 0]])
    assert view == DatasetView.from_array(X.copy())


def test_infinite_dissimilarity_propagates():
    # a custom metric may return inf; it is passed through untouched
    from genie.metrics import Metric

    inf_metric = Metric("inf", ("numeric",), lambda a, b: float("inf") if a != b else 0.0)
    space = MetricSpace(DatasetView.from_array([[0.0], [1.0]]), inf_metric)
    assert space.d(0, 1) == float("inf")
