"""Edge-sign prediction from embeddings and its metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .graph import SignedDigraph
from .logreg import LogisticModel, TrainingError, fit_logistic, sigmoid

FEATURE_MODES = ("concat", "hadamard")


@dataclass(frozen=True)
class MetricsReport:
    micro_f1: float
    macro_f1: float
    auc: float
    confusion: tuple  # ((TP, FN), (FP, TN)) with the positive class first

    def as_dict(self) -> dict:
        return {"micro_f1": self.micro_f1, "macro_f1": self.macro_f1, "auc": self.auc,
                "confusion": [list(r) for r in self.confusion]}


def edge_features(embeddings: np.ndarray, edges: SignedDigraph, mode: str = "concat") -> np.ndarray:
    vi, vj = embeddings[edges.src], embeddings[edges.dst]
    if mode == "concat":
        return np.hstack([vi, vj])
    if mode == "hadamard":
        return vi * vj
    raise ValueError(f"unknown feature mode {mode!r}")


def train_downstream(embeddings: np.ndarray, train_edges: SignedDigraph, mode: str = "concat",
                     l2: float = 1e-4, max_iter: int = 5000, tol: float = 1e-6) -> LogisticModel:
    """Logistic regression on edge features built from source and destination embeddings."""
    y = (train_edges.sign > 0).astype(np.float64)
    if np.unique(y).size < 2:
        raise TrainingError("downstream training edges contain a single class")
    return fit_logistic(edge_features(embeddings, train_edges, mode), y, l2=l2, max_iter=max_iter, tol=tol)


def auc_score(labels, scores) -> float:
    """Probability that a random positive outscores a random negative (ties count half)."""
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        warnings.warn("AUC is undefined with a single class", RuntimeWarning, stacklevel=2)
        return float("nan")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _f1(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def f1_scores(labels, predicted) -> tuple[float, float, tuple]:
    """Micro- and macro-F1 over the two sign classes, plus the confusion counts."""
    labels = np.asarray(labels).astype(bool)
    predicted = np.asarray(predicted).astype(bool)
    tp = int(np.sum(labels & predicted))
    fn = int(np.sum(labels & ~predicted))
    fp = int(np.sum(~labels & predicted))
    tn = int(np.sum(~labels & ~predicted))
    # pooled over both classes every error is one FP and one FN
    micro = _f1(tp + tn, fp + fn, fn + fp)
    macro = 0.5 * (_f1(tp, fp, fn) + _f1(tn, fn, fp))
    return micro, macro, ((tp, fn), (fp, tn))


def metrics_from_scores(labels, scores) -> MetricsReport:
    labels = np.asarray(labels).astype(bool)
    if labels.size == 0:
        raise ValueError("cannot evaluate an empty test set")
    scores = np.asarray(scores, dtype=np.float64)
    micro, macro, conf = f1_scores(labels, scores >= 0.5)
    return MetricsReport(micro, macro, auc_score(labels, scores), conf)


def score_edges(model: LogisticModel | None, embeddings: np.ndarray, edges: SignedDigraph,
                mode: str = "concat") -> np.ndarray:
    """P(positive) per edge; ``model=None`` scores by ``sigmoid(v_i . v_j)`` directly."""
    if model is None:
        return sigmoid(np.sum(embeddings[edges.src] * embeddings[edges.dst], axis=1))
    return model.predict_proba(edge_features(embeddings, edges, mode))


def evaluate(model: LogisticModel | None, embeddings: np.ndarray, test_edges: SignedDigraph,
             mode: str = "concat") -> MetricsReport:
    if test_edges.edge_count == 0:
        raise ValueError("cannot evaluate an empty test set")
    scores = score_edges(model, embeddings, test_edges, mode)
    return metrics_from_scores(test_edges.sign > 0, scores)
