import json

import numpy as np
import pytest

from minerec import learner
from minerec.errors import NonFiniteInput, SchemaMismatch, TooFewSamples
from minerec.features import feature_catalog
from minerec.learner import (
    GradientBoostedEnsemble,
    ModelBundle,
    TrainingDataset,
    cross_validate,
    feature_importance,
    featurer_insights,
    fit,
)


def dataset(X, y):
    return TrainingDataset(X=np.asarray(X, dtype=float), y=np.asarray(y, dtype=float))


def test_constant_targets_predict_constant():
    data = dataset([[0.1], [0.5], [0.9], [0.3]], [0.7, 0.7, 0.7, 0.7])
    model = fit(data, n_trees=10, min_samples_leaf=1)
    assert model.trees == ()  # no split clears the gain threshold
    for x in ([0.0], [0.42], [100.0]):
        assert model.predict(x) == pytest.approx(0.7)


def test_single_optimal_split():
    data = dataset([[0.0], [1.0]], [0.0, 1.0])
    model = fit(data, n_trees=1, max_depth=1, learning_rate=1.0, min_samples_leaf=1)
    assert model.predict([0.0]) == pytest.approx(0.0)
    assert model.predict([1.0]) == pytest.approx(1.0)
    assert model.trees[0].nodes[0].threshold == pytest.approx(0.5)


def test_separable_clusters_reach_tiny_training_error():
    rng = np.random.default_rng(0)
    X = np.concatenate([rng.uniform(0, 0.2, (12, 1)), rng.uniform(0.8, 1.0, (12, 1))])
    y = np.array([0.2] * 12 + [0.9] * 12)
    model = fit(dataset(X, y), n_trees=20, max_depth=2, learning_rate=1.0,
                min_samples_leaf=1)
    mae = float(np.abs(model.predict_batch(X) - y).mean())
    assert mae < 1e-9


def test_predict_empty_ensemble_returns_base_score():
    model = GradientBoostedEnsemble(
        base_score=0.6, learning_rate=0.1, trees=(), feature_schema=(0,), n_features=1
    )
    assert model.predict([123.0]) == 0.6


def test_predict_clamps_to_unit_interval():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, (40, 3))
    y = rng.uniform(0, 1, 40)
    model = fit(dataset(X, y), n_trees=30, max_depth=3, learning_rate=0.8,
                min_samples_leaf=1)
    for _ in range(300):
        x = rng.uniform(-4, 4, 3)
        assert 0.0 <= model.predict(x) <= 1.0


def test_predict_matches_independent_traversal():
    rng = np.random.default_rng(9)
    X = rng.uniform(0, 1, (60, 4))
    y = rng.uniform(0, 1, 60)
    model = fit(dataset(X, y), n_trees=5, max_depth=3)

    def walk(tree, i, x):
        node = tree.nodes[i]
        if node.is_leaf:
            return node.value
        if x[node.feature] <= node.threshold:
            return walk(tree, node.left, x)
        return walk(tree, node.right, x)

    for _ in range(50):
        x = rng.uniform(0, 1, 4)
        expected = model.base_score + model.learning_rate * sum(
            walk(t, 0, x) for t in model.trees
        )
        assert model.raw_predict(x) == pytest.approx(expected, abs=1e-12)


def test_predict_schema_mismatch():
    model = GradientBoostedEnsemble(
        base_score=0.5, learning_rate=0.1, trees=(), feature_schema=(0, 1), n_features=2
    )
    with pytest.raises(SchemaMismatch):
        model.predict([1.0, 2.0, 3.0])


def test_split_between_adjacent_floats_keeps_children_nonempty():
    lo = 1.0
    hi = float(np.nextafter(1.0, 2.0))
    X = np.array([[lo], [lo], [hi], [hi]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    model = fit(dataset(X, y), n_trees=1, max_depth=2, learning_rate=1.0,
                min_samples_leaf=1)
    assert np.isfinite([n.value for t in model.trees for n in t.nodes]).all()
    assert model.predict([lo]) == pytest.approx(0.0)
    assert model.predict([hi]) == pytest.approx(1.0)


def test_fit_rejects_nonfinite_and_tiny_datasets():
    with pytest.raises(NonFiniteInput):
        dataset([[np.nan]], [0.5])
    with pytest.raises(TooFewSamples):
        fit(dataset([[1.0], [2.0]], [0.1, 0.2]), min_samples_leaf=3)


def test_training_rmse_is_monotone():
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 1, (80, 5))
    y = rng.uniform(0, 1, 80)
    data = dataset(X, y)
    base = float(y.mean())
    pred = np.full(len(y), base)
    model = fit(data, n_trees=40, max_depth=3)
    last = float(np.sqrt(((y - pred) ** 2).mean()))
    for tree in model.trees:
        pred = pred + model.learning_rate * tree.predict(X)
        rmse = float(np.sqrt(((y - pred) ** 2).mean()))
        assert rmse <= last + 1e-12
        last = rmse


def test_cover_bookkeeping_invariant():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, (70, 4))
    y = rng.uniform(0, 1, 70)
    model = fit(dataset(X, y), n_trees=10, max_depth=4)
    for tree in model.trees:
        assert tree.nodes[0].cover == 70
        for node in tree.nodes:
            if not node.is_leaf:
                left = tree.nodes[node.left]
                right = tree.nodes[node.right]
                assert node.cover == left.cover + right.cover


def test_fit_is_deterministic_byte_identical():
    rng = np.random.default_rng(8)
    X = rng.uniform(0, 1, (50, 6))
    y = rng.uniform(0, 1, 50)
    one = fit(dataset(X, y), n_trees=15, max_depth=3, seed=42)
    two = fit(dataset(X, y), n_trees=15, max_depth=3, seed=42)
    doc1 = json.dumps([t.to_lists() for t in one.trees], sort_keys=True)
    doc2 = json.dumps([t.to_lists() for t in two.trees], sort_keys=True)
    assert doc1 == doc2


def test_cross_validate_partitions_rows():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, (100, 3))
    y = rng.uniform(0, 1, 100)
    report = cross_validate(dataset(X, y), k=5, n_trees=5, max_depth=2)
    assert report.fold_sizes == [20, 20, 20, 20, 20]


def test_cross_validate_learns_tree_realizable_target():
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 1, (150, 4))
    y = np.where(X[:, 0] <= 0.5, 0.8, np.where(X[:, 1] <= 0.4, 0.3, 0.6))
    report = cross_validate(dataset(X, y), k=5, n_trees=60, max_depth=3)
    assert report.mean_r2 > 0.9


def test_cross_validate_pure_noise_has_no_signal():
    rng = np.random.default_rng(6)
    X = rng.uniform(0, 1, (200, 4))
    y = rng.uniform(0, 1, 200)
    report = cross_validate(dataset(X, y), k=5, n_trees=30, max_depth=3)
    assert report.mean_r2 <= 0.1


def test_cross_validate_too_few_rows():
    with pytest.raises(TooFewSamples):
        cross_validate(dataset([[1.0], [2.0]], [0.1, 0.2]), k=5)


def test_feature_importance_single_split():
    data = dataset(
        [[0, 0, 0, 0.0], [0, 0, 0, 1.0], [0, 0, 0, 0.1], [0, 0, 0, 0.9]],
        [0.0, 1.0, 0.0, 1.0],
    )
    model = fit(data, n_trees=1, max_depth=1, min_samples_leaf=1)
    importance = feature_importance(model)
    assert importance[3] == pytest.approx(1.0)
    assert importance[0] == 0.0


def test_feature_importance_sums_to_one():
    rng = np.random.default_rng(12)
    X = rng.uniform(0, 1, (90, 5))
    y = X[:, 2] * 0.5 + X[:, 4] * 0.3
    model = fit(dataset(X, y), n_trees=20, max_depth=3)
    importance = feature_importance(model)
    assert sum(importance.values()) == pytest.approx(1.0, abs=1e-9)


def test_feature_importance_unfit_model_all_zero():
    data = dataset([[0.1], [0.2], [0.3], [0.4]], [0.5, 0.5, 0.5, 0.5])
    model = fit(data, n_trees=5, min_samples_leaf=1)
    assert all(v == 0.0 for v in feature_importance(model).values())


def _single_feature_model(feature, n_features=4):
    X = np.zeros((6, n_features))
    X[:, feature] = [0.0, 0.1, 0.2, 0.8, 0.9, 1.0]
    y = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    return fit(dataset(X, y), n_trees=1, max_depth=1, min_samples_leaf=1)


def test_featurer_insights_ranking_and_usage():
    catalog = feature_catalog()[:4]
    models = {
        ("alpha", "fitness"): _single_feature_model(1),
        ("alpha", "precision"): _single_feature_model(1),
        ("heuristics", "fitness"): _single_feature_model(2),
    }
    rows = featurer_insights(models, catalog)
    by_name = {r["index"]: r for r in rows}
    assert by_name[1]["used_in_count"] == 2
    assert by_name[2]["used_in_count"] == 1
    assert by_name[0]["used_in_count"] == 0 and by_name[0]["score"] == 0.0
    assert by_name[1]["rank"] == 1
    assert by_name[2]["rank"] == 2
    # zero-score features rank last, ordered by index
    assert by_name[0]["rank"] == 3
    assert by_name[3]["rank"] == 4
    assert by_name[1]["most_important_for"] == {"algorithm": "alpha", "measure": "fitness"}
    assert by_name[0]["most_important_for"] is None


def test_bundle_save_load_identity(tmp_path, mini_bundle):
    path = tmp_path / "bundle.json"
    mini_bundle.save(path)
    loaded = ModelBundle.load(path)
    assert loaded.version == mini_bundle.version
    assert loaded.feature_schema == mini_bundle.feature_schema
    x = np.linspace(0, 1, loaded.models[next(iter(loaded.models))].n_features)
    for key, model in mini_bundle.models.items():
        assert loaded.models[key].predict(x) == model.predict(x)
