import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moviesna.smote import SmoteConfig, smote_balance


def check_geometry(X, y, res):
    n0 = res.n_original
    assert np.array_equal(res.X[:n0], X)
    for row, (a, b), lam in zip(res.X[n0:], res.parents, res.lambdas):
        assert y[a] == y[b] and a != b
        assert np.allclose(row, X[a] + lam * (X[b] - X[a]), atol=1e-9)
        d = X[b] - X[a]
        t = (row - X[a]) @ d / max(d @ d, 1e-300)
        assert -1e-12 <= t <= 1 + 1e-12
        assert np.linalg.norm(row - X[a] - t * d) < 1e-9


def test_balanced_counts_and_geometry():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(120, 5))
    y = np.repeat([0, 1, 2, 3], [70, 30, 15, 5])
    res = smote_balance(X, y, SmoteConfig(5, 1), provenance=True)
    assert np.all(np.bincount(res.y) == 70)
    check_geometry(X, y, res)


def test_k_clamped_for_tiny_class():
    X = np.arange(20, dtype=float).reshape(10, 2)
    y = np.array([0] * 7 + [1] * 3)
    res = smote_balance(X, y, SmoteConfig(5), provenance=True)
    assert res.k_used == {1: 2}
    check_geometry(X, y, res)


def test_singleton_class_rejected():
    with pytest.raises(ValueError, match="fewer than 2"):
        smote_balance(np.zeros((3, 2)), np.array([0, 0, 1]))


def test_already_balanced_is_identity():
    X = np.eye(4)
    y = np.array([0, 1, 0, 1])
    X2, y2 = smote_balance(X, y)
    assert np.array_equal(X2, X) and np.array_equal(y2, y)


def test_deterministic():
    rng = np.random.default_rng(2)
    X, y = rng.normal(size=(40, 3)), np.array([0] * 30 + [1] * 10)
    a = smote_balance(X, y, SmoteConfig(seed=4))
    b = smote_balance(X, y, SmoteConfig(seed=4))
    assert np.array_equal(a[0], b[0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(2, 25), min_size=2, max_size=4),
       st.integers(1, 6))
def test_property(seed, sizes, k):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(len(sizes)), sizes)
    X = rng.normal(size=(len(y), 3))
    X[: sizes[0] // 2] = X[0]          # duplicates are allowed
    res = smote_balance(X, y, SmoteConfig(k, seed), provenance=True)
    assert np.all(np.bincount(res.y) == max(sizes))
    check_geometry(X, y, res)


def test_two_point_segment():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
    y = np.array([0, 0, 1, 1, 1])
    X2, y2 = smote_balance(X, y, SmoteConfig(1, 3))
    s = X2[-1]
    assert y2[-1] == 0 and s[0] == s[1] and 0 <= s[0] <= 1


def test_counts_40_30_20_10():
    rng = np.random.default_rng(3)
    y = np.repeat([0, 1, 2, 3], [40, 30, 20, 10])
    _, y2 = smote_balance(rng.normal(size=(100, 3)), y)
    assert list(np.bincount(y2)) == [40, 40, 40, 40]
