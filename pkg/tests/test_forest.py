import numpy as np
import pytest

from algoinsure.data import TabularDataset
from algoinsure.forest import (
    DecisionTree,
    ForestClassifier,
    metrics_at_threshold,
    predict_scores,
    roc_auc,
    train_forest,
)


def step_data(n=200, seed=0):
    """One informative feature with a clean step at 0.5."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (n, 1))
    y = (x[:, 0] > 0.5).astype(int)
    return x, y


class TestForestClassifier:
    def test_separable_step_function(self):
        x, y = step_data()
        model = ForestClassifier(n_trees=10, max_depth=1, random_state=0).fit(x, y)
        scores = model.predict_scores(x)
        assert roc_auc(scores, y) == 1.0

    def test_scores_in_unit_interval(self):
        x, y = step_data()
        scores = ForestClassifier(n_trees=20, random_state=0).fit(x, y).predict_scores(x)
        assert np.all((scores >= 0.0) & (scores <= 1.0))

    def test_deterministic_given_seed(self):
        x, y = step_data(seed=3)
        s1 = ForestClassifier(n_trees=15, random_state=5).fit(x, y).predict_scores(x)
        s2 = ForestClassifier(n_trees=15, random_state=5).fit(x, y).predict_scores(x)
        assert np.array_equal(s1, s2)

    def test_seed_changes_model(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(150, 4))
        y = (x[:, 0] + rng.normal(scale=0.5, size=150) > 0).astype(int)
        s1 = ForestClassifier(n_trees=5, random_state=1).fit(x, y).predict_scores(x)
        s2 = ForestClassifier(n_trees=5, random_state=2).fit(x, y).predict_scores(x)
        assert not np.array_equal(s1, s2)

    def test_max_depth_respected(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(300, 5))
        y = (x.sum(axis=1) > 0).astype(int)
        model = ForestClassifier(n_trees=10, max_depth=3, random_state=0).fit(x, y)
        assert all(tree.depth <= 3 for tree in model.trees_)

    def test_rejects_non_binary_labels(self):
        x = np.zeros((4, 1))
        with pytest.raises(ValueError):
            ForestClassifier(n_trees=2).fit(x, [0, 1, 2, 1])
        with pytest.raises(ValueError):
            ForestClassifier(n_trees=2).fit(x, [1, 1, 1, 1])

    def test_feature_dimension_checked_at_predict(self):
        x, y = step_data()
        model = ForestClassifier(n_trees=3, random_state=0).fit(x, y)
        with pytest.raises(ValueError):
            model.predict_scores(np.zeros((2, 3)))

    def test_predict_proba_columns_sum_to_one(self):
        x, y = step_data()
        proba = ForestClassifier(n_trees=5, random_state=0).fit(x, y).predict_proba(x)
        assert np.allclose(proba.sum(axis=1), 1.0)

    def test_sklearn_get_set_params(self):
        model = ForestClassifier(n_trees=7, max_depth=2)
        params = model.get_params()
        assert params["n_trees"] == 7
        clone = ForestClassifier(**params)
        assert clone.max_depth == 2

    def test_module_level_predict_scores(self):
        x, y = step_data()
        model = ForestClassifier(n_trees=5, random_state=0).fit(x, y)
        assert np.array_equal(predict_scores(model, x), model.predict_scores(x))


class TestDecisionTree:
    def test_hand_built_tree(self):
        # single split on feature 0 at 0.5: left leaf 0.2, right leaf 0.6
        tree = DecisionTree(
            feature=np.array([0, -1, -1]),
            threshold=np.array([0.5, 0.0, 0.0]),
            left=np.array([1, -1, -1]),
            right=np.array([2, -1, -1]),
            value=np.array([0.0, 0.2, 0.6]),
        )
        out = tree.predict(np.array([[0.1], [0.9]]))
        assert out[0] == pytest.approx(0.2)
        assert out[1] == pytest.approx(0.6)

    def test_two_tree_average(self):
        x, y = step_data()
        model = ForestClassifier(n_trees=2, random_state=0).fit(x, y)
        t0 = model.trees_[0].predict(x[:5])
        t1 = model.trees_[1].predict(x[:5])
        assert np.allclose(model.predict_scores(x[:5]), (t0 + t1) / 2.0)


class TestThresholdMetrics:
    def test_tau_zero_everything_positive(self):
        mt = metrics_at_threshold([0.2, 0.4, 0.9], [1, 0, 1], 0.0)
        assert mt.sensitivity == 1.0
        assert mt.specificity == 0.0

    def test_hand_confusion_matrix(self):
        mt = metrics_at_threshold([0.1, 0.4, 0.6, 0.9], [0, 0, 1, 1], 0.5)
        assert (mt.tp, mt.fp, mt.tn, mt.fn) == (2, 0, 2, 0)
        assert mt.sensitivity == 1.0
        assert mt.specificity == 1.0

    def test_strict_inequality(self):
        # a score exactly at tau is predicted negative
        mt = metrics_at_threshold([0.5], [1], 0.5)
        assert mt.fn == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            metrics_at_threshold([0.5], [1, 0], 0.5)

    def test_monotone_in_tau(self):
        rng = np.random.default_rng(2)
        scores = rng.random(500)
        labels = (scores + rng.normal(scale=0.3, size=500) > 0.5).astype(int)
        taus = np.linspace(0.0, 1.0, 21)
        sens = [metrics_at_threshold(scores, labels, t).sensitivity for t in taus]
        spec = [metrics_at_threshold(scores, labels, t).specificity for t in taus]
        assert all(a >= b for a, b in zip(sens, sens[1:]))
        assert all(a <= b for a, b in zip(spec, spec[1:]))


class TestRocAuc:
    def test_perfect_ranking(self):
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_reversed_ranking(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_random_scores_near_half(self):
        rng = np.random.default_rng(4)
        scores = rng.random(10_000)
        labels = rng.integers(0, 2, 10_000)
        assert roc_auc(scores, labels) == pytest.approx(0.5, abs=0.02)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_auc([0.1, 0.9], [1, 1])

    def test_equals_mann_whitney_with_ties(self):
        from scipy.stats import rankdata

        rng = np.random.default_rng(5)
        scores = np.round(rng.random(300), 1)  # heavy ties
        labels = rng.integers(0, 2, 300)
        n1 = labels.sum()
        n0 = labels.size - n1
        ranks = rankdata(scores)
        u = ranks[labels == 1].sum() - n1 * (n1 + 1) / 2.0
        assert roc_auc(scores, labels) == pytest.approx(u / (n0 * n1), abs=1e-10)


class TestTrainForest:
    def test_cv_selection_and_results(self):
        x, y = step_data(n=120, seed=6)
        ds = TabularDataset(x, y, ("f0",))
        model = train_forest(ds, grid={"n_trees": [5, 10], "max_depth": [2]}, cv_folds=3)
        assert model.n_trees in (5, 10)
        assert model.max_depth == 2
        assert set(model.cv_results_) == {(5, 2), (10, 2)}
        assert roc_auc(model.predict_scores(x), y) == 1.0

    def test_empty_grid_rejected(self):
        x, y = step_data(n=60)
        ds = TabularDataset(x, y, ("f0",))
        with pytest.raises(ValueError):
            train_forest(ds, grid={"n_trees": [], "max_depth": [2]}, cv_folds=2)

    def test_deterministic(self):
        x, y = step_data(n=120, seed=8)
        ds = TabularDataset(x, y, ("f0",))
        grid = {"n_trees": [5], "max_depth": [2, 3]}
        a = train_forest(ds, grid=grid, cv_folds=3, seed=1)
        b = train_forest(ds, grid=grid, cv_folds=3, seed=1)
        assert (a.n_trees, a.max_depth) == (b.n_trees, b.max_depth)
        assert np.array_equal(a.predict_scores(x), b.predict_scores(x))


class TestOnRealData:
    def test_operating_points_close_to_published(self, pipeline):
        scores, labels = pipeline.test_scores, pipeline.test.labels
        kappa_25 = metrics_at_threshold(scores, labels, 0.25).specificity
        kappa_15 = metrics_at_threshold(scores, labels, 0.15).specificity
        assert kappa_25 == pytest.approx(0.9724, abs=0.03)
        assert kappa_15 == pytest.approx(0.9449, abs=0.03)

    def test_full_sensitivity_plateau_exists(self, pipeline):
        # some threshold keeps sensitivity at 1 while maximizing specificity
        taus = np.round(np.arange(0.05, 0.751, 0.05), 2)
        full_sens = [
            metrics_at_threshold(pipeline.test_scores, pipeline.test.labels, t)
            for t in taus
        ]
        best = max(
            (m for m in full_sens if m.sensitivity == 1.0),
            key=lambda m: m.specificity,
        )
        assert best.specificity > 0.95
