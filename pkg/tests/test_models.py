import numpy as np
import pytest

import oracles
from asca.errors import EmptyDataset, ShapeError, StratifyError
from asca.models import (
    AdamState,
    Dataset,
    adam_step,
    minmax_apply,
    minmax_fit,
    report_from_predictions,
    stratified_split,
)


def test_minmax_basic_and_midpoint():
    params = minmax_fit(np.array([[2.0], [4.0]]))
    assert params.mins[0] == 2.0 and params.maxs[0] == 4.0
    assert minmax_apply(params, np.array([[3.0]]))[0, 0] == 0.5


def test_minmax_constant_column_and_no_clamping():
    X = np.array([[2.0, 7.0], [4.0, 7.0]])
    params = minmax_fit(X)
    out = minmax_apply(params, np.array([[10.0, 7.0]]))
    assert out[0, 0] == 4.0  # out-of-range values extrapolate
    assert out[0, 1] == 0.0  # constant feature collapses to zero
    scaled = minmax_apply(params, X)
    assert scaled.min() == 0.0 and scaled.max() == 1.0


def test_minmax_errors():
    with pytest.raises(EmptyDataset):
        minmax_fit(np.empty((0, 3)))
    with pytest.raises(ShapeError):
        minmax_apply(minmax_fit(np.ones((2, 3))), np.ones((2, 4)))


def test_stratified_split_balanced_counts():
    y = np.repeat([0, 1, 2, 3], 25)
    train, val = stratified_split(y, 0.2, seed=3)
    assert len(val) == 20 and len(train) == 80
    for cls in range(4):
        assert np.count_nonzero(y[val] == cls) == 5
    assert not set(train) & set(val)


def test_stratified_split_deterministic_and_imbalanced():
    y = np.array([0] * 70 + [1] * 30)
    a_train, a_val = stratified_split(y, 0.2, seed=11)
    b_train, b_val = stratified_split(y, 0.2, seed=11)
    np.testing.assert_array_equal(a_val, b_val)
    np.testing.assert_array_equal(a_train, b_train)
    assert np.count_nonzero(y[a_val] == 0) == 14
    assert np.count_nonzero(y[a_val] == 1) == 6


def test_stratified_split_minimums():
    y = np.array([0, 0, 1, 1, 1])
    _, val = stratified_split(y, 0.1, seed=0)
    # round(0.1*2)=0 and round(0.1*3)=0 both get floored to one row
    assert np.count_nonzero(y[val] == 0) == 1
    assert np.count_nonzero(y[val] == 1) == 1
    with pytest.raises(StratifyError):
        stratified_split(np.array([0, 1, 1]), 0.2, seed=0)


def test_report_perfect_predictor():
    rep = report_from_predictions([0, 1, 2, 1], [0, 1, 2, 1], ["a", "b", "c"])
    assert rep.accuracy == 1.0
    np.testing.assert_array_equal(np.diag(rep.confusion), [1, 2, 1])
    np.testing.assert_array_equal(rep.precision, [1, 1, 1])
    np.testing.assert_array_equal(rep.f1, [1, 1, 1])


def test_report_known_arithmetic():
    # confusion [[8,2],[1,9]]
    y_true = [0] * 10 + [1] * 10
    y_pred = [0] * 8 + [1] * 2 + [0] * 1 + [1] * 9
    rep = report_from_predictions(y_true, y_pred, ["n", "p"])
    np.testing.assert_array_equal(rep.confusion, [[8, 2], [1, 9]])
    assert rep.precision[0] == pytest.approx(8 / 9)
    assert rep.recall[0] == pytest.approx(0.8)
    assert rep.accuracy == pytest.approx(0.85)
    np.testing.assert_array_equal(rep.support, [10, 10])


def test_report_zero_denominators():
    # class 2 never predicted and never present
    rep = report_from_predictions([0, 0, 1], [0, 1, 1], ["a", "b", "c"])
    assert rep.precision[2] == 0.0
    assert rep.recall[2] == 0.0
    assert rep.f1[2] == 0.0


def test_report_matches_counting_oracle(rng):
    y_true = rng.integers(0, 5, 200)
    y_pred = rng.integers(0, 5, 200)
    rep = report_from_predictions(y_true, y_pred, list("abcde"))
    ref = oracles.confusion_naive(y_true, y_pred, 5)
    np.testing.assert_array_equal(rep.confusion, ref)
    for c in range(5):
        col = ref[:, c].sum()
        row = ref[c].sum()
        assert rep.precision[c] == pytest.approx(ref[c, c] / col if col else 0.0)
        assert rep.recall[c] == pytest.approx(ref[c, c] / row if row else 0.0)
    assert rep.accuracy == pytest.approx(np.trace(ref) / 200)


def test_report_empty():
    with pytest.raises(EmptyDataset):
        report_from_predictions([], [], ["a"])


def test_adam_first_step_magnitude():
    p = [np.array([1.0])]
    state = AdamState.for_params(p)
    adam_step(p, [np.array([1.0])], state, lr=0.001)
    assert p[0][0] == pytest.approx(1.0 - 0.001, abs=1e-8)
    assert state.t == 1


def test_adam_zero_gradient_is_identity():
    p = [np.array([0.3, -0.7])]
    state = AdamState.for_params(p)
    for _ in range(10):
        adam_step(p, [np.zeros(2)], state, lr=0.5)
    np.testing.assert_array_equal(p[0], [0.3, -0.7])


def test_adam_identical_histories_update_identically(rng):
    p = [np.array([2.0, 2.0])]
    state = AdamState.for_params(p)
    for _ in range(5):
        g = float(rng.normal())
        adam_step(p, [np.array([g, g])], state, lr=0.01)
    assert p[0][0] == p[0][1]


def test_dataset_validation():
    with pytest.raises(ShapeError):
        Dataset(np.ones((3, 2)), np.array([0, 1]), ["a", "b"])
    with pytest.raises(ShapeError):
        Dataset(np.ones((2, 2)), np.array([0, 5]), ["a", "b"])
