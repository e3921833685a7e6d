"""Linear SVM trained by Pegasos-style stochastic subgradient descent.

The objective is ``0.5 * ||w||^2 + C * sum_i hinge(y_i * (w . z_i + b))``.
Dividing by ``C * n`` gives the Pegasos form with ``lambda = 1 / (C * n)``,
which is what the update steps use. Defaults are fixed; there is no tuning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hitpredict.learners.base import TrainedModel


def hinge_objective(w: np.ndarray, b: float, Z: np.ndarray, y_pm: np.ndarray, C: float):
    """Primal objective and a subgradient ``(g_w, g_b)``; exact wherever no margin equals 1."""
    margin = y_pm * (Z @ w + b)
    active = margin < 1.0
    value = 0.5 * (w @ w) + C * np.maximum(0.0, 1.0 - margin).sum()
    g_w = w - C * (y_pm[active] @ Z[active])
    g_b = -C * y_pm[active].sum()
    return value, g_w, g_b


def fit_linear_svm(Z: np.ndarray, y: np.ndarray, C: float = 1.0, epochs: int = 200, seed: int = 0):
    y_pm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    n, d = Z.shape
    lam = 1.0 / (C * n)
    order = np.random.default_rng(seed).permutation(n)
    # w is held as scale * v so the shrink step is O(1).
    v = np.zeros(d)
    scale = 1.0
    b = 0.0
    t = 0
    for _ in range(epochs):
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            z, yi = Z[i], y_pm[i]
            margin = yi * (scale * (z @ v) + b)
            shrink = 1.0 - eta * lam
            if shrink == 0.0:
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink
            if margin < 1.0:
                v += (eta * yi / scale) * z
                b += eta * yi
            if scale < 1e-100:
                v *= scale
                scale = 1.0
    return scale * v, float(b)


@dataclass(frozen=True, eq=False)
class SvmModel(TrainedModel):
    algorithm = "linear_svm"

    weights: np.ndarray = None
    bias: float = 0.0

    def _score(self, Z):
        return Z @ self.weights + self.bias

    def params(self):
        return {"weights": self.weights.tolist(), "bias": self.bias}
