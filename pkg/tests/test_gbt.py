import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvr_baseline import gbt
from cvr_baseline.errors import ConfigError, EmptyTrainingSet, FeatureCountMismatch, NonFiniteInput
from cvr_baseline.gbt import GbtHyperparams, Growth

STUMP = GbtHyperparams(learning_rate=1.0, n_estimators=1, max_depth=1)


def brute_force_stump(X, y):
    """Exhaustive best single split: (sse, feature, lo, hi, left_mean, right_mean).

    ``(lo, hi)`` is the open interval of thresholds giving the same partition.
    """
    best = (float(np.sum((y - y.mean()) ** 2)), -1, None, None, y.mean(), y.mean())
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            left = X[:, f] <= lo
            yl, yr = y[left], y[~left]
            sse = float(np.sum((yl - yl.mean()) ** 2) + np.sum((yr - yr.mean()) ** 2))
            if sse < best[0] - 1e-9 * max(1.0, abs(best[0])):
                best = (sse, f, lo, hi, yl.mean(), yr.mean())
    return best


def test_spec_stump():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0.0, 0.0, 10.0, 10.0])
    model = gbt.fit(X, y, STUMP)
    tree = model.trees[0]
    assert tree.threshold[0] == 2.5
    assert model.base_value == 5.0
    assert sorted(tree.value[tree.leaves()]) == [-5.0, 5.0]
    assert gbt.predict(model, [[1.0], [4.0], [2.5]]).tolist() == [0.0, 10.0, 0.0]


def test_constant_target_gives_root_only():
    X = np.random.default_rng(0).normal(size=(20, 3))
    model = gbt.fit(X, np.full(20, 7.0), GbtHyperparams(n_estimators=10))
    assert model.n_trees == 1 and model.trees[0].n_nodes == 1
    assert np.all(gbt.predict(model, X) == 7.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_stump_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, f = rng.integers(2, 51), rng.integers(1, 5)
    X = rng.integers(0, 6, size=(n, f)).astype(float)
    y = rng.normal(size=n)
    model = gbt.fit(X, y, STUMP)
    sse, feat, lo, hi, ml, mr = brute_force_stump(X, y)
    tree = model.trees[0]
    if feat < 0:
        assert tree.n_nodes == 1
        return
    assert tree.feature[0] == feat
    assert lo < tree.threshold[0] < hi or tree.threshold[0] == lo
    pred = gbt.predict(model, X)
    expected = np.where(X[:, feat] <= lo, ml, mr)
    assert np.allclose(pred, expected, atol=1e-12)


def test_tie_prefers_lowest_feature():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 1.0, 3.0, 3.0])
    assert gbt.fit(X, y, STUMP).trees[0].feature[0] == 0


@pytest.mark.parametrize("growth", list(Growth))
def test_leaf_means(growth):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 3))
    y = X[:, 0] * 3 + rng.normal(size=40)
    hp = GbtHyperparams(learning_rate=1.0, n_estimators=1, max_depth=3, growth=growth, max_leaves=5)
    model = gbt.fit(X, y, hp)
    tree = model.trees[0]
    leaf = tree.apply(X)
    for nd in np.unique(leaf):
        assert tree.value[nd] == pytest.approx(np.mean(y[leaf == nd] - model.base_value), abs=1e-12)


@pytest.mark.parametrize("growth", list(Growth))
def test_training_loss_monotone(growth):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 4))
    y = np.sin(X[:, 0]) + X[:, 1] ** 2 + rng.normal(scale=0.1, size=60)
    losses = []
    for n_est in range(1, 30):
        hp = GbtHyperparams(learning_rate=0.2, n_estimators=n_est, max_depth=3, growth=growth, max_leaves=6)
        losses.append(np.mean((gbt.predict(gbt.fit(X, y, hp), X) - y) ** 2))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_overfit_distinct_rows():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(16, 2))
    y = rng.normal(size=16)
    hp = GbtHyperparams(learning_rate=1.0, n_estimators=5, max_depth=8)
    assert np.allclose(gbt.predict(gbt.fit(X, y, hp), X), y, atol=1e-10)


def test_depth_and_leaf_limits():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 3))
    y = rng.normal(size=200)
    lvl = gbt.fit(X, y, GbtHyperparams(n_estimators=5, max_depth=3))
    assert all(t.depth() <= 3 and len(t.leaves()) <= 8 for t in lvl.trees)
    leaf = gbt.fit(X, y, GbtHyperparams(n_estimators=5, max_depth=7, growth="LeafWise", max_leaves=5))
    assert all(t.depth() <= 7 and len(t.leaves()) <= 5 for t in leaf.trees)
    assert any(len(t.leaves()) == 5 for t in leaf.trees)


def test_leaf_wise_prefers_max_gain_leaf():
    # left half is noisy, right half is flat: the second split must go left
    X = np.arange(8.0)[:, None]
    y = np.array([0.0, 10.0, 0.0, 10.0, 100.0, 100.0, 100.0, 100.0])
    hp = GbtHyperparams(learning_rate=1.0, n_estimators=1, max_depth=5, growth="LeafWise", max_leaves=3)
    tree = gbt.fit(X, y, hp).trees[0]
    assert tree.threshold[0] == 3.5
    assert tree.feature[tree.left[0]] == 0 and tree.feature[tree.right[0]] == -1


def test_min_samples_leaf():
    X = np.arange(10.0)[:, None]
    y = np.array([100.0] + [0.0] * 9)
    hp = GbtHyperparams(learning_rate=1.0, n_estimators=1, max_depth=1, min_samples_leaf=3)
    tree = gbt.fit(X, y, hp).trees[0]
    assert tree.threshold[0] == 2.5


def test_fit_many_equals_separate_fits():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(30, 4))
    Y = rng.normal(size=(30, 3))
    hp = GbtHyperparams(n_estimators=20)
    many = gbt.fit_many(X, Y, hp)
    for k in range(3):
        assert np.array_equal(gbt.predict(many[k], X), gbt.predict(gbt.fit(X, Y[:, k], hp), X))


def test_determinism():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    hp = GbtHyperparams(n_estimators=30, growth="LeafWise", max_depth=7)
    assert gbt.fit(X, y, hp, seed=1).to_json() == gbt.fit(X, y, hp, seed=1).to_json()


def test_errors():
    with pytest.raises(EmptyTrainingSet):
        gbt.fit(np.empty((0, 2)), np.empty(0), STUMP)
    with pytest.raises(NonFiniteInput):
        gbt.fit(np.array([[np.nan]]), np.array([1.0]), STUMP)
    model = gbt.fit(np.ones((3, 2)), np.arange(3.0), STUMP)
    with pytest.raises(FeatureCountMismatch):
        gbt.predict(model, np.ones((1, 3)))


def test_hyperparam_validation():
    with pytest.raises(ConfigError):
        GbtHyperparams(learning_rate=0)
    with pytest.raises(ConfigError):
        GbtHyperparams(growth="LeafWise", max_leaves=1)


def test_tuned_defaults():
    hp = gbt.default_hyperparams(15, Growth.LEAF_WISE)
    assert (hp.learning_rate, hp.n_estimators, hp.max_depth) == (0.075, 150, 7)
    hp = gbt.default_hyperparams(60, Growth.LEVEL_WISE)
    assert (hp.learning_rate, hp.n_estimators, hp.max_depth) == (0.1, 50, 3)
    assert gbt.default_hyperparams(60, Growth.LEAF_WISE).learning_rate == 0.05
