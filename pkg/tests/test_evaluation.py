import itertools
import json
import warnings

import numpy as np
import pytest

from dynwalk.embed import EmbeddingTable
from dynwalk.errors import DegenerateClass, TooFewVertices, UnknownVertex
from dynwalk.evaluation import (
    Classifier,
    ClassifierConfig,
    LabelSet,
    _logistic_objective,
    evaluate,
    fit_binary,
    macro_f1,
    predict,
    predict_from_scores,
    train_classifier,
)


def table_from(X):
    X = np.asarray(X, dtype=float)
    return EmbeddingTable(np.arange(len(X)), X)


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 5))
    y = rng.random(30) < 0.4
    params = rng.normal(size=6)
    _, grad = _logistic_objective(params, X, y.astype(float), 0.7)
    eps = 1e-6
    num = np.zeros_like(params)
    for i in range(len(params)):
        hi, lo = params.copy(), params.copy()
        hi[i] += eps
        lo[i] -= eps
        num[i] = (_logistic_objective(hi, X, y, 0.7)[0] - _logistic_objective(lo, X, y, 0.7)[0]) / (2 * eps)
    assert np.linalg.norm(grad - num) / np.linalg.norm(num) <= 1e-4


def test_separable_two_class_accuracy():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(-3, 0.5, (20, 2)), rng.normal(3, 0.5, (20, 2))])
    labels = LabelSet({i: {int(i >= 20)} for i in range(40)}, 2)
    emb = table_from(X)
    clf = train_classifier(emb, labels, range(40))
    pred = predict(clf, emb, range(40), labels)
    assert all(p == labels.labels[i] for i, p in enumerate(pred))


def test_constant_features_give_class_prior():
    X = np.ones((50, 3))
    labels = LabelSet({i: {int(i < 15)} for i in range(50)}, 2)
    clf = train_classifier(table_from(X), labels, range(50))
    probs = clf.scores(X[:1])[0]
    # bias is unpenalised; weights on a constant feature are shrunk
    assert probs[1] == pytest.approx(15 / 50, abs=1e-3)
    assert probs[0] == pytest.approx(35 / 50, abs=1e-3)


def test_degenerate_class_warns_and_never_predicts():
    X = np.random.default_rng(2).normal(size=(10, 2))
    labels = LabelSet({i: {i % 2} for i in range(10)} | {10: {2}}, 3)
    emb = table_from(np.vstack([X, [[0.0, 0.0]]]))
    with pytest.warns(DegenerateClass):
        clf = train_classifier(emb, labels, range(10))
    assert clf.degenerate == [2]
    assert all(2 not in p for p in predict(clf, emb, range(11), labels))
    assert np.isfinite(clf.weights).all()


def test_coefficients_finite_on_fuzzed_inputs():
    rng = np.random.default_rng(3)
    for _ in range(5):
        X = rng.normal(scale=rng.uniform(0.01, 50), size=(40, 4))
        y = rng.random(40) < 0.5
        w, b = fit_binary(X, y, ClassifierConfig())
        assert np.isfinite(w).all() and np.isfinite(b)


def test_predict_rules():
    assert predict_from_scores(np.array([[0.9, 0.2, 0.7]]), [0]) == [{0}]
    multi = LabelSet({0: {1, 2}}, 3, multi_label=True)
    assert predict_from_scores(np.array([[0.9, 0.2, 0.7]]), [0], multi) == [{0, 2}]
    clf = Classifier(np.zeros((1, 2)), np.zeros(1))
    emb = table_from(np.zeros((3, 2)))
    assert predict(clf, emb, [0, 1, 2]) == [{0}, {0}, {0}]
    with pytest.raises(UnknownVertex):
        predict(clf, emb, [7])


def test_macro_f1_examples():
    truth = [{0}, {1}, {1}]
    assert macro_f1(truth, truth, 2) == 1.0
    # class0: TP=1 FP=1 FN=0; class1: TP=1 FP=0 FN=1
    assert macro_f1([{0}, {0}, {1}], [{0}, {1}, {1}], 2) == pytest.approx(2 / 3)
    assert macro_f1([{1}, {0}], [{0}, {1}], 2) == 0.0
    # an absent class still counts in the average
    assert macro_f1(truth, truth, 3) == pytest.approx(2 / 3)


def test_macro_f1_permutation_invariant():
    rng = np.random.default_rng(4)
    pred = [{int(x)} for x in rng.integers(0, 3, 20)]
    truth = [{int(x)} for x in rng.integers(0, 3, 20)]
    base = macro_f1(pred, truth, 3)
    perm = rng.permutation(20)
    assert macro_f1([pred[i] for i in perm], [truth[i] for i in perm], 3) == pytest.approx(base)
    for cp in itertools.permutations(range(3)):
        relabel = lambda s: {cp[c] for c in s}
        assert macro_f1([relabel(p) for p in pred], [relabel(t) for t in truth], 3) == pytest.approx(base)


def test_evaluate_report_shape_and_determinism():
    rng = np.random.default_rng(5)
    y = rng.integers(0, 3, 200)
    X = np.eye(3)[y] * 2 + rng.normal(0, 0.7, (200, 3))
    labels = LabelSet({i: {int(c)} for i, c in enumerate(y)}, 3)
    emb = table_from(X)
    lcc = set(range(200)) - {5, 6}
    rep = evaluate(emb, labels, lcc, 0.09, 10, rng=1)
    assert len(rep.per_split) == 10
    assert rep.macro_f1_mean == pytest.approx(np.mean(rep.per_split))
    assert rep.macro_f1_std == pytest.approx(np.std(rep.per_split))
    assert rep.macro_f1_mean > 0.7
    assert rep == evaluate(emb, labels, lcc, 0.09, 10, rng=1)
    assert json.loads(rep.to_json())["n_splits"] == 10


def test_evaluate_train_on_everything_upper_bounds_held_out():
    rng = np.random.default_rng(6)
    y = rng.integers(0, 2, 120)
    X = np.eye(2)[y] + rng.normal(0, 1.0, (120, 2))
    labels = LabelSet({i: {int(c)} for i, c in enumerate(y)}, 2)
    emb = table_from(X)
    held = evaluate(emb, labels, set(range(120)), 0.5, 10, rng=0).macro_f1_mean
    clf = train_classifier(emb, labels, range(120))
    train_score = macro_f1(predict(clf, emb, range(120), labels), [labels.labels[i] for i in range(120)], 2)
    assert train_score >= held - 0.02


def test_evaluate_too_few():
    labels = LabelSet({0: {0}, 1: {1}}, 2)
    with pytest.raises(TooFewVertices):
        evaluate(table_from(np.eye(2)), labels, {0, 1}, 0.09, 2)
    with pytest.raises(ValueError):
        evaluate(table_from(np.eye(2)), labels, {0, 1}, 1.0, 2)


def test_label_file_roundtrip(tmp_path):
    ls = LabelSet({0: {1}, 3: {0, 2}}, 3, multi_label=True)
    ls.save(tmp_path / "l.txt")
    back = LabelSet.load(tmp_path / "l.txt")
    assert back.labels == ls.labels and back.multi_label
    with pytest.raises(ValueError):
        LabelSet({0: {1, 2}}, 3, multi_label=False)
