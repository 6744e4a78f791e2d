import numpy as np
import pytest

from moviesna.learners import (
    BoostParams, ForestParams, MlpParams, TreeParams, default_params, load_model, predict,
    predict_proba, save_model, train,
)
from moviesna.learners.boosting import bin_borders, cross_entropy, train_gb
from moviesna.learners.mlp import forward, init_weights, loss_and_grad, param_count
from moviesna.learners.tree import gini, resolve_max_features, train_tree

from oracles import best_split_bruteforce, finite_difference, max_relative_error


def blobs(n=300, seed=0, k=3, d=4):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, k, n)
    X = rng.normal(size=(n, d)) + 2.5 * np.eye(k, d)[y]
    return X, y


def test_param_count_table():
    assert param_count(291) == [18688, 1040, 68]
    w = init_weights(291, 4, np.random.default_rng(0))
    assert [a.size + b.size for a, b in zip(w[::2], w[1::2])] == [18688, 1040, 68]


def test_gini():
    assert gini([5, 5]) == 0.5
    assert gini([4, 0]) == 0.0


@pytest.mark.parametrize("seed", range(15))
def test_root_split_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(25, 3)).astype(float)
    y = rng.integers(0, 3, 25)
    if len(np.unique(y)) < 2:
        y[0], y[1] = 0, 1
    m = train_tree(X, y, TreeParams(max_depth=1, max_features="all"), n_classes=3)
    score, j, thr = best_split_bruteforce(X, y, 3)
    if m.arrays["feature"][0] < 0:
        assert all(len(np.unique(X[:, c])) == 1 for c in range(3))
        return
    assert m.arrays["feature"][0] == j
    assert m.arrays["threshold"][0] == pytest.approx(thr)


def test_tree_fits_training_data():
    X, y = blobs()
    m = train_tree(X, y, TreeParams(max_features="all"))
    assert np.all(predict(m, X) == y)


def test_tree_leaf_purity_with_min_leaf():
    X, y = blobs()
    m = train_tree(X, y, TreeParams(min_samples_leaf=20, max_features="all"))
    counts = np.bincount(m.leaf_index(X))
    assert counts[counts > 0].min() >= 20


def test_max_features_resolution():
    assert resolve_max_features("auto", 100) == 10
    assert resolve_max_features("all", 7) == 7
    assert resolve_max_features(0.5, 10) == 5
    with pytest.raises(ValueError):
        resolve_max_features(0, 10)


@pytest.mark.parametrize("kind", ["tree", "forest", "gb", "mlp"])
def test_models_learn_and_round_trip(kind, tmp_path):
    X, y = blobs()
    params = default_params(kind, seed=1)
    if kind == "forest":
        params = ForestParams(n_estimators=15, tree=params.tree, seed=1)
    if kind == "gb":
        params = BoostParams(n_iterations=40, seed=1)
    model = train(kind, X[:200], y[:200], params, n_classes=3)
    acc = (predict(model, X[200:]) == y[200:]).mean()
    assert acc > 0.75
    p = predict_proba(model, X[200:])
    assert p.shape == (100, 3) and np.allclose(p.sum(axis=1), 1)
    save_model(model, tmp_path / "m.txt")
    back = load_model(tmp_path / "m.txt")
    assert np.array_equal(predict_proba(back, X), predict_proba(model, X))
    again = train(kind, X[:200], y[:200], params, n_classes=3)
    assert np.array_equal(predict_proba(again, X), predict_proba(model, X))


def test_width_mismatch_raises():
    X, y = blobs()
    m = train("tree", X, y)
    with pytest.raises(ValueError):
        m.predict(X[:, :2])


def test_training_data_checks():
    with pytest.raises(ValueError):
        train("gb", np.zeros((0, 2)), np.zeros(0, int))
    with pytest.raises(ValueError):
        train("tree", np.zeros((5, 2)), np.zeros(5, int))
    with pytest.raises(ValueError):
        train("svm", np.zeros((5, 2)), np.arange(5) % 2)


def test_gb_loss_decreases():
    X, y = blobs()
    m = train_gb(X, y, BoostParams(n_iterations=30))
    loss = m.train_loss
    assert loss[-1] < loss[0] and np.all(np.diff(loss) <= 1e-12)


def test_gb_init_is_log_prior():
    X, y = blobs()
    m = train_gb(X, y, BoostParams(n_iterations=0))
    assert np.allclose(m.predict_proba(X[:1])[0], np.bincount(y) / len(y))
    assert cross_entropy(np.zeros((2, 2)), np.array([0, 1])) == pytest.approx(np.log(2))


def test_bin_borders():
    assert np.allclose(bin_borders(np.array([1.0, 2.0, 3.0])), [1.5, 2.5])
    b = bin_borders(np.random.default_rng(0).normal(size=5000), 64)
    assert len(b) <= 63 and np.all(np.diff(b) > 0)


def test_mlp_gradient():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 5))
    y = rng.integers(0, 4, 6)
    w = init_weights(5, 4, rng, hidden=(7, 3))
    for i in range(1, len(w), 2):
        w[i] = rng.normal(0, 0.1, size=w[i].shape)
    _, grads = loss_and_grad(w, X, y)
    for arr, g in zip(w, grads):
        num = finite_difference(lambda: loss_and_grad(w, X, y)[0], arr)
        assert max_relative_error(g, num, floor=1e-7) < 1e-4


def test_mlp_gradient_with_fixed_masks():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(5, 4)), rng.integers(0, 4, 5)
    w = init_weights(4, 4, rng, hidden=(6, 5))
    masks = [(rng.random((5, 6)) > 0.3) / 0.7, (rng.random((5, 5)) > 0.3) / 0.7]
    _, grads = loss_and_grad(w, X, y, masks)
    num = finite_difference(lambda: loss_and_grad(w, X, y, masks)[0], w[0])
    assert max_relative_error(grads[0], num, floor=1e-7) < 1e-4


def test_mlp_forward_shape():
    w = init_weights(291, 4, np.random.default_rng(0))
    logits, acts = forward(w, np.zeros((3, 291)))
    assert logits.shape == (3, 4) and [a.shape[1] for a in acts] == [291, 64, 16]


def test_mlp_params_validation():
    with pytest.raises(ValueError):
        MlpParams(dropout_rate=1.0)


def test_one_dim_separable_tree():
    X = np.array([[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    m = train_tree(X, y)
    assert m.depth == 1 and np.all(m.predict(X) == y)


def test_gini_bounds():
    rng = np.random.default_rng(0)
    for _ in range(50):
        counts = rng.integers(0, 10, 4)
        if counts.sum() == 0:
            continue
        g = gini(counts)
        assert 0 <= g <= 1 - 1 / 4 + 1e-12
        assert (g == 0) == (np.count_nonzero(counts) == 1)


def test_degenerate_forest_equals_tree():
    from moviesna.learners.tree import train_forest
    X, y = blobs(seed=3)
    tree = train_tree(X, y, TreeParams(max_features="all", seed=2))
    forest = train_forest(X, y, ForestParams(1, TreeParams(max_features="all"), bootstrap=False, seed=5))
    assert np.array_equal(forest.predict(X), tree.predict(X))


def test_forest_separable_and_deterministic():
    from moviesna.learners.tree import train_forest
    X, y = blobs(n=120, seed=4)
    X = X + 10 * np.eye(3, 4)[y]
    params = ForestParams(25, TreeParams(), seed=1)
    m = train_forest(X, y, params)
    assert (m.predict(X) == y).mean() == 1.0
    assert np.array_equal(m.predict_proba(X), train_forest(X, y, params).predict_proba(X))


def test_gb_zero_learning_rate_is_prior():
    X, y = blobs()
    m = train_gb(X, y, BoostParams(learning_rate=0.0, n_iterations=10))
    assert np.allclose(m.predict_proba(X), np.bincount(y) / len(y))


def test_gb_one_newton_step_by_hand():
    X = np.array([[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]])
    y = np.array([0, 0, 1, 0, 1, 1])
    lam, lr = 1.0, 0.3
    m = train_gb(X, y, BoostParams(depth=1, learning_rate=lr, l2_leaf_reg=lam, n_iterations=1))
    p = np.full(6, 0.5)
    for c in range(2):
        resid = (y == c) - p
        h = p * (1 - p)

        def score(mask):
            return resid[mask].sum() ** 2 / (h[mask].sum() + lam)

        gains = {t: score(X[:, 0] <= t) + score(X[:, 0] > t) for t in (0.5, 1.5, 2.5, 3.5, 4.5)}
        thr = max(gains, key=lambda t: (round(gains[t], 12), -t))
        assert m.arrays["threshold"][0, c, 0] == thr
        left = X[:, 0] <= thr
        for node, mask in ((1, left), (2, ~left)):
            expect = lr * resid[mask].sum() / (h[mask].sum() + lam)
            assert abs(m.arrays["value"][0, c, node] - expect) < 1e-9


def test_gb_separable():
    X = np.array([[float(i)] for i in range(20)])
    y = (X[:, 0] >= 10).astype(int)
    m = train_gb(X, y, BoostParams(learning_rate=0.1, n_iterations=50))
    assert (m.predict(X) == y).mean() == 1.0


def test_mlp_zero_epochs():
    from moviesna.learners.mlp import train_mlp
    X, y = blobs()
    m = train_mlp(X, y, MlpParams(epochs=0))
    p = m.predict_proba(X)
    assert np.allclose(p.sum(axis=1), 1, atol=1e-9)
    w = init_weights(X.shape[1], 3, np.random.default_rng(np.random.SeedSequence([0])))
    assert p.shape == (len(X), 3)


def test_proba_contracts_and_manual_traversal():
    X, y = blobs(seed=5)
    m = train_tree(X, y, TreeParams(max_depth=4, max_features="all"))
    a = m.arrays
    for row in X[:20]:
        node = 0
        while a["feature"][node] >= 0:
            node = a["left"][node] if row[a["feature"][node]] <= a["threshold"][node] else a["right"][node]
        assert np.array_equal(m.predict_proba(row[None])[0], a["value"][node])
    p = m.predict_proba(X)
    assert np.allclose(p.sum(axis=1), 1, atol=1e-9)
    assert np.array_equal(p.argmax(axis=1), m.predict(X))


def test_tree_monotone_invariance():
    X, y = blobs(seed=6)
    m1 = train_tree(X, y, TreeParams(max_features="all"))
    X2 = X.copy()
    X2[:, 1] = np.exp(X2[:, 1])
    m2 = train_tree(X2, y, TreeParams(max_features="all"))
    rng = np.random.default_rng(1)
    T = rng.normal(size=(50, 4))
    T2 = T.copy()
    T2[:, 1] = np.exp(T2[:, 1])
    assert np.array_equal(m1.predict(T), m2.predict(T2))
