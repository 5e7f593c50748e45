"""Binary logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TrainingError(RuntimeError):
    pass


@dataclass
class LogisticModel:
    """Coefficients on standardised features plus the scaler that produced them.

    A feature with zero training variance gets ``std = 0`` and is zeroed at
    prediction time.
    """

    bias: float
    coef: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    iterations: int = 0
    loss: float = float("nan")

    def standardize(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        scale = np.divide(1.0, self.std, out=np.zeros_like(self.std), where=self.std > 0)
        return (X - self.mean) * scale

    def decision(self, X) -> np.ndarray:
        return self.bias + self.standardize(X) @ self.coef

    def predict_proba(self, X) -> np.ndarray:
        """P(positive) for each row of raw features."""
        return sigmoid(self.decision(X))

    @classmethod
    def zeros(cls, dim: int) -> "LogisticModel":
        return cls(0.0, np.zeros(dim), np.zeros(dim), np.ones(dim))


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_objective(coef, bias, Z, y, l2):
    """Mean negative log-likelihood plus ``l2/2 * |coef|^2`` and its gradient."""
    z = bias + Z @ coef
    t = 2.0 * y - 1.0
    loss = np.mean(np.logaddexp(0.0, -t * z)) + 0.5 * l2 * float(coef @ coef)
    resid = (sigmoid(z) - y) / len(y)
    return loss, Z.T @ resid + l2 * coef, float(resid.sum())


def fit_logistic(X, y, l2: float = 1e-4, max_iter: int = 5000, tol: float = 1e-6) -> LogisticModel:
    """Fit on raw features ``X`` (n x k) and 0/1 labels ``y``.

    Features are standardised with training mean/std. The step size grows
    after every accepted step and is halved until the Armijo condition holds.
    Stops when the objective moves by less than ``tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ValueError("X must be 2-D with one row per label")
    if np.unique(y).size < 2:
        raise TrainingError("training labels contain a single class")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std < 1e-12] = 0.0
    model = LogisticModel(0.0, np.zeros(X.shape[1]), mean, std)
    Z = model.standardize(X)
    coef, bias = np.zeros(X.shape[1]), 0.0
    loss, gw, gb = logistic_objective(coef, bias, Z, y, l2)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        gnorm2 = float(gw @ gw + gb * gb)
        while True:
            c2, b2 = coef - step * gw, bias - step * gb
            new_loss, ngw, ngb = logistic_objective(c2, b2, Z, y, l2)
            if new_loss <= loss - 0.5 * step * gnorm2 or step < 1e-12:
                break
            step *= 0.5
        coef, bias = c2, b2
        done = abs(loss - new_loss) < tol
        loss, gw, gb = new_loss, ngw, ngb
        if not np.isfinite(loss):
            raise TrainingError("logistic regression diverged")
        if done:
            break
        step *= 2.0
    model.coef, model.bias = coef, float(bias)
    model.iterations, model.loss = it, float(loss)
    return model


def model_to_text(model: LogisticModel) -> str:
    """Bias and coefficients on one line, then one ``mean std`` line per feature."""
    lines = ["# bias coef_1..coef_k / per-feature scaler: mean std",
             " ".join(repr(float(v)) for v in [model.bias, *model.coef])]
    lines += [f"{float(m)!r} {float(s)!r}" for m, s in zip(model.mean, model.std)]
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> LogisticModel:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = [float(v) for v in rows[0]]
    scaler = np.array([[float(v) for v in r] for r in rows[1:]])
    if scaler.shape != (len(head) - 1, 2):
        raise ValueError("model file: scaler rows do not match the coefficient count")
    return LogisticModel(head[0], np.array(head[1:]), scaler[:, 0].copy(), scaler[:, 1].copy())
