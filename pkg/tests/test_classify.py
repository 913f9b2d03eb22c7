import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from egylpr.classify import (EUCLIDEAN, STANDARDIZED, euclidean_distance, knn_classify, knn_fit, loo_risk,
                             standardized_euclidean, svm_classify, svm_margin, svm_train)
from egylpr.errors import DegenerateTrainingSet


def linear_scan(X, labels, q, variances=None):
    best, best_i = None, None
    for i, x in enumerate(X):
        s = 0.0
        for j in range(len(q)):
            d = (x[j] - q[j]) ** 2
            s += d / variances[j] if variances is not None else d
        d = math.sqrt(s)
        if best is None or d < best:
            best, best_i = d, i
    return labels[best_i], best


@pytest.mark.parametrize("metric", [EUCLIDEAN, STANDARDIZED])
def test_knn_matches_linear_scan(metric):
    rng = np.random.default_rng(30)
    for _ in range(100):
        n, d = int(rng.integers(3, 30)), int(rng.integers(1, 8))
        X = rng.normal(size=(n, d)) * rng.uniform(0.5, 5, size=d)
        labels = [f"c{v}" for v in rng.integers(0, 4, size=n)]
        m = knn_fit(X, labels, metric)
        q = rng.normal(size=d)
        lab, dist = knn_classify(m, q)
        rlab, rdist = linear_scan(X, labels, q, m.variances)
        assert lab == rlab
        assert dist == pytest.approx(rdist, rel=1e-12)


def test_distance_functions():
    assert euclidean_distance([0, 0], [3, 4]) == 5.0
    assert standardized_euclidean([0, 0], [3, 4], [9, 16]) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        euclidean_distance([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        standardized_euclidean([1, 2], [1, 2], [1, 0])


@given(arrays(np.int64, st.tuples(st.integers(2, 12), st.integers(1, 5)),
              elements=st.integers(-1000, 1000)))
def test_knn_exact_member_has_zero_distance(X):
    X = X.astype(np.float64)
    labels = list(range(X.shape[0]))
    m = knn_fit(X, labels, EUCLIDEAN, reject_percentile=None)
    for i, x in enumerate(X):
        lab, dist = knn_classify(m, x)
        assert dist == 0.0
        assert np.array_equal(X[lab], x)


def test_knn_duplicating_training_set_keeps_answers():
    rng = np.random.default_rng(31)
    X = rng.normal(size=(40, 5))
    labels = list(rng.integers(0, 3, size=40))
    a = knn_fit(X, labels)
    b = knn_fit(np.vstack([X, X]), labels + labels)
    for q in rng.normal(size=(30, 5)):
        assert knn_classify(a, q) == knn_classify(b, q)


def test_knn_vote_and_validation():
    X = np.array([[0.0], [1.0], [1.1], [5.0]])
    m = knn_fit(X, ["a", "b", "b", "a"], k=3)
    assert knn_classify(m, [0.2])[0] == "b"
    with pytest.raises(ValueError):
        knn_fit(X, ["a"] * 4, k=2)
    with pytest.raises(DegenerateTrainingSet):
        knn_fit(np.ones((3, 2)), ["a", "b", "c"], STANDARDIZED)


def test_reject_threshold_is_within_class_percentile():
    X = np.array([[0.0], [1.0], [3.0], [10.0], [14.0]])
    labels = ["a", "a", "a", "b", "b"]
    m = knn_fit(X, labels, reject_percentile=100)
    assert m.reject_threshold == 4.0
    assert knn_fit(X, labels, reject_percentile=None).reject_threshold == float("inf")


def _blobs(rng, n_per, centers, spread=0.3):
    X = np.vstack([rng.normal(c, spread, size=(n_per, len(c))) for c in centers])
    y = [i for i in range(len(centers)) for _ in range(n_per)]
    return X, y


def test_svm_separates_toy_blobs():
    rng = np.random.default_rng(32)
    X, y = _blobs(rng, 15, [(0, 0), (4, 0), (0, 4)])
    m = svm_train(X, y)
    assert m.classes == (0, 1, 2)
    assert all(svm_classify(m, x) == t for x, t in zip(X, y))
    lab, margin = svm_margin(m, [4.0, 0.0])
    assert lab == 1 and margin > 0


def test_svm_is_deterministic():
    rng = np.random.default_rng(33)
    X, y = _blobs(rng, 8, [(0, 0, 0), (3, 3, 3)])
    a, b = svm_train(X, y), svm_train(X, y)
    assert np.array_equal(a.W, b.W) and np.array_equal(a.b, b.b)


def test_svm_validation():
    with pytest.raises(DegenerateTrainingSet):
        svm_train(np.zeros((3, 2)), [1, 1, 1])
    with pytest.raises(ValueError):
        svm_train(np.zeros((3, 2)), [1, 2])
    with pytest.raises(ValueError):
        svm_train(np.zeros((3, 2)), [1, 2, 1], reg_c=0)


def test_loo_risk_separable_is_zero():
    rng = np.random.default_rng(34)
    X, y = _blobs(rng, 6, [(0, 0), (5, 5)])
    assert loo_risk(X, y) == 0.0


def test_loo_risk_on_label_noise_is_high():
    rng = np.random.default_rng(35)
    X = rng.normal(size=(30, 4))
    y = list(rng.integers(0, 2, size=30))
    assert loo_risk(X, y) >= 0.3


def test_loo_risk_with_knn():
    X = np.array([[0.0], [0.1], [5.0], [5.1]])
    y = ["a", "a", "b", "b"]
    assert loo_risk(X, y, trainer=lambda A, l: knn_fit(A, l),
                    classifier=lambda m, q: knn_classify(m, q)[0]) == 0.0
    with pytest.raises(DegenerateTrainingSet):
        loo_risk(X[:2], ["a", "b"])


def _disk(rng, center, n):
    r, t = np.sqrt(rng.random(n)), rng.random(n) * 2 * np.pi
    return np.c_[center[0] + r * np.cos(t), center[1] + r * np.sin(t)]


@pytest.fixture
def toy():
    rng = np.random.default_rng(36)
    X = np.vstack([_disk(rng, (0, 0), 20), _disk(rng, (10, 10), 20)])
    return X, ["A"] * 20 + ["B"] * 20


def test_svm_toy_set_has_no_training_errors(toy):
    X, y = toy
    m = svm_train(X, y)
    assert all(svm_classify(m, x) == t for x, t in zip(X, y))
    assert svm_classify(m, [1.0, -0.5]) == "A"


def test_svm_duplicated_training_set_keeps_predictions(toy):
    X, y = toy
    a, b = svm_train(X, y), svm_train(np.vstack([X, X]), y + y)
    probe = np.random.default_rng(37).uniform(-3, 13, size=(200, 2))
    assert [svm_classify(a, p) for p in probe] == [svm_classify(b, p) for p in probe]


def test_svm_uniform_bias_shift_keeps_labels(toy):
    X, y = toy
    m = svm_train(X, y)
    shifted = dataclasses.replace(m, b=m.b + 7.5)
    probe = np.random.default_rng(38).uniform(-3, 13, size=(100, 2))
    assert [svm_classify(m, p) for p in probe] == [svm_classify(shifted, p) for p in probe]
    with pytest.raises(ValueError):
        svm_classify(m, [1.0, 2.0, 3.0])


def test_loo_risk_on_ten_noise_samples():
    risks = []
    for seed in range(20):
        r = np.random.default_rng(seed)
        y = [0, 1] * 5
        r.shuffle(y)
        risks.append(loo_risk(r.normal(size=(10, 4)), y))
    assert np.mean(risks) >= 0.3


vec3 = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3))


@given(vec3, vec3, vec3, arrays(np.float64, 3, elements=st.floats(0.1, 10)))
def test_distances_are_metrics(a, b, c, v):
    for dist in (euclidean_distance, lambda p, q: standardized_euclidean(p, q, v)):
        assert dist(a, a) == 0.0
        assert dist(a, b) == dist(b, a)
        assert dist(a, c) <= dist(a, b) + dist(b, c) + 1e-9


def test_standardized_examples():
    assert standardized_euclidean([2, 1], [0, 0], [4, 1]) == pytest.approx(math.sqrt(2))
    assert standardized_euclidean([1, 5], [4, 1], [1, 1]) == euclidean_distance([1, 5], [4, 1])
