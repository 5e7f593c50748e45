import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score, roc_auc_score

from oracles import trapezoid_auc
from signtrust.evaluation import (auc_score, edge_features, evaluate, f1_scores, metrics_from_scores, score_edges,
                                  train_downstream)
from signtrust.graph import SignedDigraph
from signtrust.logreg import TrainingError


def test_perfect_classifier():
    labels = np.array([1, 1, 0, 1, 0])
    m = metrics_from_scores(labels, labels.astype(float))
    assert (m.micro_f1, m.macro_f1, m.auc) == (1.0, 1.0, 1.0)


def test_hand_confusion():
    # TP=8, FN=2, FP=1, TN=9
    labels = np.array([1] * 10 + [0] * 10, bool)
    pred = np.array([1] * 8 + [0] * 2 + [1] + [0] * 9, bool)
    micro, macro, conf = f1_scores(labels, pred)
    assert conf == ((8, 2), (1, 9))
    assert micro == pytest.approx(0.85, abs=1e-12)
    assert macro == pytest.approx(0.5 * (16 / 19 + 18 / 21), abs=1e-12)
    assert macro == pytest.approx(0.849624, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=2, max_size=60), st.integers(0, 10_000))
def test_f1_matches_sklearn(labels, seed):
    labels = np.array(labels)
    pred = np.random.default_rng(seed).random(len(labels)) < 0.6
    micro, macro, _ = f1_scores(labels, pred)
    assert micro == pytest.approx(f1_score(labels, pred, average="micro"), abs=1e-12)
    assert macro == pytest.approx(f1_score(labels, pred, average="macro", labels=[False, True],
                                          zero_division=0), abs=1e-12)


def test_symmetric_confusion_equal_micro_macro():
    labels = np.array([1] * 5 + [0] * 5, bool)
    pred = np.array([1, 1, 1, 1, 0, 1, 0, 0, 0, 0], bool)
    micro, macro, _ = f1_scores(labels, pred)
    assert micro == pytest.approx(macro, abs=1e-15)


@pytest.mark.parametrize("seed", range(100))
def test_rank_auc_equals_trapezoid(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    labels = rng.random(n) < 0.5
    labels[0], labels[1] = True, False
    scores = np.round(rng.random(n), 1)  # plenty of ties
    assert abs(auc_score(labels, scores) - trapezoid_auc(labels, scores)) < 1e-10
    assert abs(auc_score(labels, scores) - roc_auc_score(labels, scores)) < 1e-10


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_auc_invariant_under_monotone_maps(seed):
    rng = np.random.default_rng(seed)
    labels = np.r_[True, False, rng.random(30) < 0.4]
    scores = rng.normal(size=32)
    base = auc_score(labels, scores)
    for f in (np.exp, lambda x: 3 * x - 7, lambda x: x ** 3, lambda x: 1 / (1 + np.exp(-x))):
        assert auc_score(labels, f(scores)) == pytest.approx(base, abs=1e-12)


def test_single_class_auc_is_nan():
    with pytest.warns(RuntimeWarning):
        assert np.isnan(auc_score([1, 1, 1], [0.2, 0.4, 0.9]))


def test_empty_test_set():
    with pytest.raises(ValueError):
        evaluate(None, np.zeros((2, 2)), SignedDigraph.from_edges(2, []))


def test_separable_one_hot_embeddings():
    # node class decides the sign: edges into class-1 nodes are negative
    cls = np.array([0, 0, 0, 1, 1, 1])
    emb = np.eye(2)[cls]
    edges = [(u, v, 1 if cls[v] == 0 else -1) for u in range(6) for v in range(6) if u != v]
    g = SignedDigraph.from_edges(6, edges)
    model = train_downstream(emb, g)
    rep = evaluate(model, emb, g)
    assert rep.micro_f1 == 1.0 and rep.auc == 1.0
    assert sum(map(sum, rep.confusion)) == g.edge_count
    again = train_downstream(emb, g)
    assert np.array_equal(model.coef, again.coef)


def test_single_class_downstream():
    with pytest.raises(TrainingError):
        train_downstream(np.eye(3), SignedDigraph.from_edges(3, [(0, 1, 1), (1, 2, 1)]))


def test_feature_modes_and_dot_scorer():
    emb = np.array([[1.0, 2.0], [3.0, -1.0]])
    g = SignedDigraph.from_edges(2, [(0, 1, 1)])
    assert edge_features(emb, g).tolist() == [[1.0, 2.0, 3.0, -1.0]]
    assert edge_features(emb, g, "hadamard").tolist() == [[3.0, -2.0]]
    assert score_edges(None, emb, g)[0] == pytest.approx(1 / (1 + np.exp(-1.0)))
    with pytest.raises(ValueError):
        edge_features(emb, g, "sum")


def test_metrics_in_range():
    rng = np.random.default_rng(1)
    labels = rng.random(200) < 0.8
    m = metrics_from_scores(labels, rng.random(200))
    assert all(0 <= v <= 1 for v in (m.micro_f1, m.macro_f1, m.auc))
    assert set(m.as_dict()) == {"micro_f1", "macro_f1", "auc", "confusion"}
