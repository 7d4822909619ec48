import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minerec import discovery, recommender, xes
from minerec.errors import AllZeroWeights, InvalidWeights
from minerec.quality import MEASURES
from minerec.recommender import WeightVector, evaluate_ground_truth, recommend, score


def weights(f=25, p=25, g=25, s=25):
    return WeightVector(fitness=f, precision=p, generalization=g, simplicity=s)


def test_score_single_measure_selection():
    predicted = {"fitness": 0.8, "precision": 0.6, "generalization": 1.0, "simplicity": 0.4}
    assert score(predicted, weights(100, 0, 0, 0)) == pytest.approx(0.8)


def test_score_two_measure_mean():
    predicted = {"fitness": 0.8, "precision": 0.6, "generalization": 1.0, "simplicity": 0.4}
    assert score(predicted, weights(50, 50, 0, 0)) == pytest.approx(0.7)


def test_all_zero_weights_rejected():
    with pytest.raises(AllZeroWeights):
        weights(0, 0, 0, 0)


def test_out_of_range_weights_rejected():
    with pytest.raises(InvalidWeights):
        weights(101, 0, 0, 0)
    with pytest.raises(InvalidWeights):
        weights(-1, 50, 0, 0)
    with pytest.raises(InvalidWeights):
        WeightVector.from_mapping({"fitness": 10, "precision": 10})


@given(
    st.lists(st.floats(0, 1), min_size=4, max_size=4),
    st.lists(st.floats(0, 100), min_size=4, max_size=4).filter(lambda w: sum(w) > 0),
    st.floats(0.01, 50),
)
@settings(max_examples=80, deadline=None)
def test_score_scale_invariance_and_hull(values, raw_weights, scale):
    predicted = dict(zip(MEASURES, values))
    w1 = WeightVector(**dict(zip(MEASURES, raw_weights)))
    scaled = [min(v * scale, 100.0) for v in raw_weights]
    base = score(predicted, w1)
    assert min(values) - 1e-12 <= base <= max(values) + 1e-12
    if all(v * scale <= 100 for v in raw_weights):
        w2 = WeightVector(**dict(zip(MEASURES, scaled)))
        assert score(predicted, w2) == pytest.approx(base, abs=1e-9)


def test_score_monotone_in_predicted_value():
    low = {"fitness": 0.4, "precision": 0.5, "generalization": 0.5, "simplicity": 0.5}
    high = dict(low, fitness=0.9)
    w = weights(40, 20, 20, 20)
    assert score(high, w) > score(low, w)


def test_recommend_contains_every_algorithm_once(mini_bundle, l1_log):
    rec = recommend(l1_log, weights(), mini_bundle, log_id="l1")
    assert sorted(rec.ranking()) == sorted(discovery.PORTFOLIO)
    scores = [r.score for r in rec.results]
    assert scores == sorted(scores, reverse=True)


def test_recommend_fitness_only_orders_by_predicted_fitness(mini_bundle, l1_log):
    rec = recommend(l1_log, weights(100, 0, 0, 0), mini_bundle, log_id="l1")
    by_fitness = sorted(
        rec.results, key=lambda r: (-r.predicted["fitness"], r.algorithm)
    )
    assert [r.algorithm for r in rec.results] == [r.algorithm for r in by_fitness]


def test_recommend_weight_scaling_changes_nothing(mini_bundle, l1_log):
    one = recommend(l1_log, weights(10, 20, 5, 15), mini_bundle, log_id="l1")
    two = recommend(l1_log, weights(20, 40, 10, 30), mini_bundle, log_id="l1")
    assert one.ranking() == two.ranking()
    for a, b in zip(one.results, two.results):
        assert a.score == pytest.approx(b.score, abs=1e-12)


def test_recommend_deterministic_serialization(mini_bundle, l1_log):
    one = recommend(l1_log, weights(), mini_bundle, log_id="l1").to_json()
    two = recommend(l1_log, weights(), mini_bundle, log_id="l1").to_json()
    assert one == two


def test_ground_truth_inductive_fitness_is_one(l1_log):
    rec = evaluate_ground_truth(l1_log, weights())
    by_alg = {r.algorithm: r for r in rec.results}
    assert by_alg["inductive"].predicted["fitness"] == pytest.approx(1.0)


def test_ground_truth_sequential_log_all_fit():
    log = xes.log_from_sequences([("a", "b", "c")] * 5)
    rec = evaluate_ground_truth(log, weights())
    for result in rec.results:
        assert not result.failed
        assert result.predicted["fitness"] == pytest.approx(1.0)


def test_ground_truth_fitness_only_ranks_inductive_first(l1_log):
    rec = evaluate_ground_truth(l1_log, weights(100, 0, 0, 0))
    top = rec.results[0]
    by_alg = {r.algorithm: r for r in rec.results}
    assert top.predicted["fitness"] >= by_alg["inductive"].predicted["fitness"] - 1e-12
    assert by_alg["inductive"].predicted["fitness"] == pytest.approx(1.0)
