"""Random forest classifier and regressors built from scratch."""

import numpy as np
import pytest

from axokit import ModelFormatError, WidthMismatchError
from axokit.forest import (
    ForestModel,
    ForestParams,
    _Tree,
    hamming_eval,
    load_model,
    predict_bits,
    predict_bits_batch,
    predict_metric,
    regressor_grid,
    save_model,
    train_classifier,
    train_regressor,
)
from axokit.matching import TrainingSet

MEMO_PARAMS = ForestParams(n_trees=5, max_depth=None, features_per_split="all",
                           bootstrap=False, seed=0)


def memorizable_set():
    """16 distinct 4-bit inputs, deterministic 8-bit outputs."""
    X = np.array([[(u >> i) & 1 for i in range(4)] for u in range(16)], dtype=np.uint8)
    Y = np.array([[((u * 7 + 3) >> i) & 1 for i in range(8)] for u in range(16)],
                 dtype=np.uint8)
    return TrainingSet(X, Y, 0)


def test_classifier_memorizes_distinct_rows():
    t = memorizable_set()
    model, report = train_classifier(t, MEMO_PARAMS)
    assert report.hamming_max == 0
    assert report.hamming_mean == 0
    assert all(a == 1.0 for a in report.per_bit_accuracy)
    assert np.array_equal(predict_bits_batch(model, t.X), t.Y)


def test_classifier_constant_targets():
    X = np.array([[(u >> i) & 1 for i in range(4)] for u in range(8)], dtype=np.uint8)
    Y = np.ones((8, 3), dtype=np.uint8)
    model, _ = train_classifier(TrainingSet(X, Y, 0))
    assert predict_bits_batch(model, X).min() == 1


def test_classifier_needs_two_rows():
    X = np.zeros((1, 4), dtype=np.uint8)
    Y = np.zeros((1, 2), dtype=np.uint8)
    with pytest.raises(ValueError):
        train_classifier(TrainingSet(X, Y, 0))


def test_classifier_deterministic(tmp_path):
    t = memorizable_set()
    params = ForestParams(n_trees=16, seed=5)
    m1, _ = train_classifier(t, params)
    m2, _ = train_classifier(t, params, threads=4)
    p1, p2 = tmp_path / "a.fmodel", tmp_path / "b.fmodel"
    save_model(m1, p1)
    save_model(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    m3, _ = train_classifier(t, ForestParams(n_trees=16, seed=6))
    save_model(m3, p2)
    assert p1.read_bytes() != p2.read_bytes()


def leaf_tree(value):
    return _Tree(
        feature=np.asarray([-1], dtype=np.int32),
        left=np.asarray([0], dtype=np.int32),
        right=np.asarray([0], dtype=np.int32),
        payload=np.asarray([[value]], dtype=np.float64),
    )


def test_predict_bits_tie_keeps_lut():
    model = ForestModel("classifier", ForestParams(n_trees=2), 3, 1,
                        [leaf_tree(1.0), leaf_tree(0.0)])
    assert predict_bits(model, (0, 1, 0)) == (1,)


def test_predict_bits_rejects_regressor():
    model = ForestModel("regressor", ForestParams(n_trees=1), 3, 1, [leaf_tree(0.5)])
    with pytest.raises(ValueError):
        predict_bits(model, (0, 0, 0))
    with pytest.raises(ValueError):
        predict_metric(ForestModel("classifier", ForestParams(n_trees=1), 3, 1,
                                   [leaf_tree(1.0)]), np.zeros((2, 3), dtype=np.uint8))


def test_width_mismatch():
    model = ForestModel("classifier", ForestParams(n_trees=1), 3, 1, [leaf_tree(1.0)])
    with pytest.raises(WidthMismatchError):
        predict_bits_batch(model, np.zeros((2, 5), dtype=np.uint8))


def test_hamming_eval_counts():
    t = memorizable_set()
    model, _ = train_classifier(t, MEMO_PARAMS)
    Y = t.Y.copy()
    Y[0] ^= 1  # 8 flipped bits on row 0
    Y[1, 0] ^= 1  # 1 flipped bit on row 1
    rep = hamming_eval(model, TrainingSet(t.X, Y, 0))
    assert rep.hamming_max == 8
    assert rep.hamming_mean == pytest.approx(9 / 16)
    assert rep.hamming_hist[0] == 14
    assert rep.hamming_hist[1] == 1
    assert rep.hamming_hist[8] == 1


def test_regressor_memorizes_lut_util(adder4_char):
    # lut_util is exactly the config popcount, a pure function of the bits
    model, rep = train_regressor(adder4_char, "lut_util", MEMO_PARAMS,
                                 test_fraction=0.0)
    assert rep.rmse_train == 0
    assert rep.r2_train == 1.0
    pred = predict_metric(model, adder4_char.config_matrix())
    assert np.array_equal(pred, adder4_char.metric_values("lut_util"))


def test_regressor_split_and_report(adder8_char):
    params = ForestParams(n_trees=32, max_depth=12, seed=0)
    model, rep = train_regressor(adder8_char, "pdplut", params, split_seed=1)
    assert rep.n_rows == len(adder8_char)
    assert rep.rmse_test is not None and rep.rmse_test >= 0
    assert rep.rmse_test_scaled is not None
    span = np.ptp(adder8_char.metric_values("pdplut"))
    assert rep.rmse_test_scaled == pytest.approx(rep.rmse_test / span)
    assert rep.r2_train <= 1.0 + 1e-12


def test_regressor_deterministic(adder8_char, tmp_path):
    params = ForestParams(n_trees=8, max_depth=8, seed=3)
    m1, r1 = train_regressor(adder8_char, "avg_abs_rel_err", params, split_seed=2)
    m2, r2 = train_regressor(adder8_char, "avg_abs_rel_err", params, split_seed=2,
                             threads=4)
    assert r1.rmse_train == r2.rmse_train
    p1, p2 = tmp_path / "a.fmodel", tmp_path / "b.fmodel"
    save_model(m1, p1)
    save_model(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_small_batch_path_matches_vectorized(adder8_char):
    params = ForestParams(n_trees=8, max_depth=10, seed=0)
    model, _ = train_regressor(adder8_char, "pdplut", params)
    X = adder8_char.config_matrix()[:64]
    batch = predict_metric(model, X)
    singles = np.concatenate([predict_metric(model, X[i:i + 1]) for i in range(len(X))])
    assert np.array_equal(batch, singles)


def test_save_load_round_trip(adder4_char, tmp_path):
    t = memorizable_set()
    params = ForestParams(n_trees=4, max_depth=None, features_per_split=2,
                          bootstrap=True, seed=7)
    model, _ = train_classifier(t, params)
    path = tmp_path / "m.fmodel"
    save_model(model, path)
    back = load_model(path)
    assert back.kind == "classifier"
    assert back.params == params
    assert back.input_width == model.input_width
    assert back.meta == {k: str(v) for k, v in model.meta.items()}
    assert np.array_equal(predict_bits_batch(back, t.X), predict_bits_batch(model, t.X))

    reg, _ = train_regressor(adder4_char, "pdplut", ForestParams(n_trees=3, seed=1),
                             test_fraction=0.0)
    rpath = tmp_path / "r.fmodel"
    save_model(reg, rpath)
    rback = load_model(rpath)
    X = adder4_char.config_matrix()
    assert np.array_equal(predict_metric(rback, X), predict_metric(reg, X))


def test_load_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.fmodel"
    p.write_text("not a model\n")
    with pytest.raises(ModelFormatError):
        load_model(p)


def test_load_rejects_truncation(tmp_path):
    t = memorizable_set()
    model, _ = train_classifier(t, ForestParams(n_trees=2))
    p = tmp_path / "m.fmodel"
    save_model(model, p)
    lines = p.read_text().splitlines()
    (tmp_path / "trunc.fmodel").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "trunc.fmodel")


def test_load_rejects_tamper(tmp_path):
    t = memorizable_set()
    model, _ = train_classifier(t, ForestParams(n_trees=2))
    p = tmp_path / "m.fmodel"
    save_model(model, p)
    text = p.read_text().replace("payload=", "payload= 0", 1)
    (tmp_path / "tampered.fmodel").write_text(text)
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "tampered.fmodel")


def test_params_validation():
    with pytest.raises(ValueError):
        ForestParams(n_trees=0)
    with pytest.raises(ValueError):
        ForestParams(max_depth=0)
    assert ForestParams(features_per_split="sqrt").n_candidates(16) == 4
    assert ForestParams(features_per_split="all").n_candidates(9) == 9
    assert ForestParams(features_per_split=3).n_candidates(2) == 2
    with pytest.raises(ValueError):
        ForestParams(features_per_split=0).n_candidates(4)


def test_regressor_grid(adder4_char):
    params, model, rep = regressor_grid(adder4_char, "pdplut", seed=0, split_seed=0,
                                        threads=4)
    from axokit.forest import GRID_DEPTHS, GRID_TREES

    assert params.n_trees in GRID_TREES
    assert params.max_depth in GRID_DEPTHS
    assert rep.rmse_test is not None
    assert model.kind == "regressor"
