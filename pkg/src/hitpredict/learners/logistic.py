"""L2-regularized logistic regression by full-batch gradient descent with backtracking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from hitpredict.learners.base import TrainedModel

MIN_STEP = 1e-12


def loss_and_grad(w: np.ndarray, b: float, Z: np.ndarray, y_pm: np.ndarray, l2: float):
    """Mean logistic loss plus ``l2/2 * ||w||^2``, and its gradient.

    ``y_pm`` holds labels in {-1, +1}. The bias is not regularized.
    """
    margin = y_pm * (Z @ w + b)
    loss = np.logaddexp(0.0, -margin).mean() + 0.5 * l2 * (w @ w)
    coef = -y_pm * expit(-margin) / len(y_pm)
    return loss, Z.T @ coef + l2 * w, coef.sum()


def fit_logistic(
    Z: np.ndarray,
    y: np.ndarray,
    l2: float = 1e-4,
    max_epochs: int = 500,
    tol: float = 1e-6,
    trace: list | None = None,
) -> tuple[np.ndarray, float]:
    """Return ``(w, b)`` for standardized inputs ``Z`` and 0/1 labels ``y``.

    Weights start at zero and the bias at the training log-odds (the bias
    optimum for zero weights). Each epoch starts from step 1.0 and halves it
    until the loss stops increasing. Accepted losses are appended to
    ``trace`` when given.
    """
    y_pm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    w = np.zeros(Z.shape[1])
    rate = float(np.mean(y_pm > 0))
    b = math.log(rate / (1.0 - rate)) if 0.0 < rate < 1.0 else 0.0
    loss, gw, gb = loss_and_grad(w, b, Z, y_pm, l2)
    if trace is not None:
        trace.append(loss)
    for _ in range(max_epochs):
        step = 1.0
        while True:
            w_new, b_new = w - step * gw, b - step * gb
            new_loss, new_gw, new_gb = loss_and_grad(w_new, b_new, Z, y_pm, l2)
            if new_loss <= loss or step < MIN_STEP:
                break
            step *= 0.5
        if new_loss > loss:
            break
        decrease = loss - new_loss
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        if trace is not None:
            trace.append(loss)
        if decrease < tol:
            break
    return w, float(b)


@dataclass(frozen=True, eq=False)
class LogisticModel(TrainedModel):
    algorithm = "logistic"

    weights: np.ndarray = None
    bias: float = 0.0

    def decision(self, Z: np.ndarray) -> np.ndarray:
        return Z @ self.weights + self.bias

    def _score(self, Z):
        return expit(self.decision(Z))

    def params(self):
        return {"weights": self.weights.tolist(), "bias": self.bias}
