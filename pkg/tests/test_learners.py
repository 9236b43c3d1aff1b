import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitlab.exceptions import DegenerateDataError
from splitlab.learners import (
    DecisionTreeClassifier, GradientBoostingClassifier, RandomForestClassifier, downsample,
    forest_fit, forest_predict_proba, gbt_fit, gbt_predict_proba,
)
from splitlab.learners.tree import resolve_max_features
from splitlab.metrics import balanced_accuracy

import oracles
from conftest import blobs

LEARNER_CLASSES = [RandomForestClassifier, GradientBoostingClassifier]


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 50), st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_tree_splits_match_exhaustive_gini(n, d, levels, seed):
    rng = np.random.default_rng(seed)
    # few distinct values, so ties between thresholds and features do occur
    X = rng.integers(0, levels + 1, size=(n, d)).astype(float)
    y = rng.integers(0, 2, n)
    y[:2] = [0, 1]
    tree = DecisionTreeClassifier(random_state=seed).fit(X, y).tree_
    for node, rows in oracles.node_members(tree, X).items():
        assert tree.n_node_samples[node] == rows.size
        labels = y[rows]
        assert tree.value[node] == pytest.approx((labels.sum() + 1) / (rows.size + 2))
        oracle = oracles.best_gini_split(X[rows], labels)
        if tree.is_leaf(node):
            assert labels.min() == labels.max() or oracle is None
        else:
            _, feat, thr = oracle
            assert (tree.feature[node], tree.threshold[node]) == (feat, thr)


def test_depth_one_tree_picks_informative_predictor():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 200)
    X = np.column_stack([rng.integers(0, 2, 200), y]).astype(float)
    tree = DecisionTreeClassifier(max_depth=1, random_state=0).fit(X, y).tree_
    assert tree.node_count == 3
    assert tree.feature[0] == 1
    assert oracles.best_gini_split(X, y)[1] == 1


def test_tree_depth_limit_and_leaf_probabilities():
    X, y = blobs(60, gap=0.3, seed=4)
    for depth in (1, 2, 4):
        tree = DecisionTreeClassifier(max_depth=depth, random_state=1).fit(X, y).tree_
        assert tree.max_depth <= depth
        leaves = [i for i in range(tree.node_count) if tree.is_leaf(i)]
        internal = [i for i in range(tree.node_count) if not tree.is_leaf(i)]
        assert len(leaves) == len(internal) + 1
        assert all(0 < tree.value[i] < 1 for i in leaves)


def test_max_features():
    assert resolve_max_features("sqrt", 10) == 3
    assert resolve_max_features(None, 10) == 10
    with pytest.raises(ValueError):
        resolve_max_features(11, 10)


# --- ensembles ---------------------------------------------------------------

@pytest.mark.parametrize("cls", LEARNER_CLASSES)
def test_separable_blobs(cls):
    X, y = blobs(100, seed=1)
    model = cls(random_state=3).fit(X, y)
    assert balanced_accuracy(y, model.predict(X)) == 1.0
    Xt, yt = blobs(100, seed=2)
    assert balanced_accuracy(yt, model.predict(Xt)) == 1.0


@pytest.mark.parametrize("cls", LEARNER_CLASSES)
def test_noise_is_chance_level(cls):
    rng = np.random.default_rng(5)
    X = rng.random((1000, 10))
    y = rng.permutation(np.repeat([0, 1], 500))
    model = cls(random_state=5).fit(X[:500], y[:500])
    assert 0.4 <= balanced_accuracy(y[500:], model.predict(X[500:])) <= 0.6


@pytest.mark.parametrize("cls", LEARNER_CLASSES)
def test_single_class_is_rejected(cls):
    with pytest.raises(DegenerateDataError):
        cls().fit(np.ones((5, 3)), np.zeros(5))


@pytest.mark.parametrize("cls", LEARNER_CLASSES)
def test_deterministic(cls):
    X, y = blobs(80, gap=0.5, seed=7)
    a = cls(random_state=11).fit(X, y)
    b = cls(random_state=11).fit(X, y)
    assert a.to_dict() == b.to_dict()
    np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))


@pytest.mark.parametrize("cls", LEARNER_CLASSES)
def test_dimension_mismatch(cls):
    X, y = blobs(20, seed=0)
    model = cls(random_state=0).fit(X, y)
    with pytest.raises(ValueError, match="features"):
        model.predict_proba(X[:, :4])


def test_forest_is_mean_of_its_trees():
    X, y = blobs(50, gap=0.4, seed=3)
    forest = forest_fit(X, y, n_trees=15, seed=2)
    assert len(forest.estimators_) == 15
    by_tree = np.mean([t.predict_proba(X)[:, 1] for t in forest.estimators_], axis=0)
    np.testing.assert_allclose(forest_predict_proba(forest, X), by_tree, rtol=0, atol=1e-15)

    single = forest_fit(X, y, n_trees=1, seed=2)
    np.testing.assert_array_equal(forest_predict_proba(single, X),
                                  single.estimators_[0].tree_.predict_value(X))


def test_forest_memorizes_training_rows():
    X, y = blobs(100, seed=8)
    p = forest_predict_proba(forest_fit(X, y, seed=1), X)
    assert np.all(np.where(y == 1, p, 1 - p) >= 0.9)


def test_forest_predictions_are_row_permutation_equivariant():
    X, y = blobs(60, gap=0.3, seed=9)
    forest = forest_fit(X, y, n_trees=20, seed=0)
    perm = np.random.default_rng(0).permutation(X.shape[0])
    np.testing.assert_array_equal(forest_predict_proba(forest, X)[perm],
                                  forest_predict_proba(forest, X[perm]))


def test_forest_independent_of_n_jobs():
    X, y = blobs(60, gap=0.3, seed=9)
    a = RandomForestClassifier(n_estimators=12, random_state=4).fit(X, y)
    b = RandomForestClassifier(n_estimators=12, random_state=4, n_jobs=3).fit(X, y)
    assert a.to_dict() == b.to_dict()


def test_forest_get_params_and_string_labels():
    model = RandomForestClassifier(n_estimators=5, random_state=0)
    assert model.get_params()["max_features"] == "sqrt"
    X, y = blobs(20, seed=0)
    labels = np.where(y == 1, "Botnet", "Normal")
    assert set(model.fit(X, labels).predict(X)) <= {"Botnet", "Normal"}


def test_gbt_zero_learning_rate_gives_prevalence_log_odds():
    X, y = blobs(30, seed=0)
    y = y.copy()
    y[:10] = 1  # prevalence 40 / 60
    model = gbt_fit(X, y, n_stages=1, learning_rate=0.0)
    np.testing.assert_allclose(model.decision_function(X), np.log(40 / 20))
    assert model.init_score_ == pytest.approx(np.log(2.0))


def test_gbt_sigmoid():
    X, y = blobs(20, seed=0)
    model = gbt_fit(X, y, n_stages=1, learning_rate=0.0)
    assert np.all(gbt_predict_proba(model, X) == 0.5)
    model.init_score_ = 10.0
    assert np.all(gbt_predict_proba(model, X) >= 0.9999)


def test_gbt_staged_scores_match_truncated_models():
    X, y = blobs(60, gap=0.3, seed=2)
    full = GradientBoostingClassifier(n_estimators=30).fit(X, y)
    staged = list(full.staged_decision_function(X))
    assert len(staged) == 30
    for k in (1, 7, 30):
        truncated = GradientBoostingClassifier(n_estimators=k).fit(X, y)
        np.testing.assert_allclose(staged[k - 1], truncated.decision_function(X), rtol=0, atol=1e-12)


def _loss_oracle(y, score):
    p = 1.0 / (1.0 + np.exp(-score))
    return -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))


@settings(max_examples=25, deadline=None)
@given(st.integers(10, 120), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_gbt_training_loss_never_increases(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = (X[:, 0] + 0.3 * rng.standard_normal(n) > 0.5).astype(int)
    y[:2] = [0, 1]
    model = GradientBoostingClassifier(n_estimators=40).fit(X, y)
    losses = [_loss_oracle(y, np.full(n, model.init_score_))]
    losses += [_loss_oracle(y, s) for s in model.staged_decision_function(X)]
    np.testing.assert_allclose(model.train_loss_, losses, rtol=1e-9)
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert losses[-1] <= losses[1]


@pytest.mark.parametrize("n_major, n_minor", [(190, 10), (50, 50), (19271, 1595)])
def test_downsample_counts(n_major, n_minor):
    labels = np.r_[np.ones(n_major, int), np.zeros(n_minor, int)]
    idx = downsample(labels, seed=3)
    assert np.unique(idx).size == idx.size == 2 * n_minor
    assert np.sum(labels[idx] == 1) == np.sum(labels[idx] == 0) == n_minor
    assert set(np.flatnonzero(labels == 0)) <= set(idx)
    np.testing.assert_array_equal(idx, downsample(labels, seed=3))


def test_downsample_needs_two_classes():
    with pytest.raises(DegenerateDataError):
        downsample(np.ones(10))
