"""Gaussian naive Bayes with the posterior computed in log space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from hitpredict.learners.base import TrainedModel


def fit_gaussian_nb(Z: np.ndarray, y: np.ndarray, var_floor: float = 1e-9):
    """Per-class priors, feature means and (floored, ddof=0) variances; class order is (0, 1)."""
    y = np.asarray(y)
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    means = np.vstack([Z[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.vstack([np.maximum(Z[y == c].var(axis=0), var_floor) for c in (0, 1)])
    return priors, means, variances


def log_joint(Z: np.ndarray, priors, means, variances) -> np.ndarray:
    """``log P(c) + sum_j log N(z_j; mu_cj, var_cj)``, shape ``(n, 2)``."""
    out = np.empty((Z.shape[0], 2))
    for c in (0, 1):
        ll = -0.5 * (np.log(2 * np.pi * variances[c]) + (Z - means[c]) ** 2 / variances[c])
        out[:, c] = np.log(priors[c]) + ll.sum(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class NaiveBayesModel(TrainedModel):
    algorithm = "naive_bayes"

    priors: np.ndarray = None
    means: np.ndarray = None
    variances: np.ndarray = None

    def log_odds(self, Z: np.ndarray) -> np.ndarray:
        # Differences are taken per feature before summing: with floored
        # variances each log-likelihood can be ~1e12 and would swamp the prior.
        m, v = self.means, self.variances
        per_feature = 0.5 * (np.log(v[0] / v[1]) + (Z - m[0]) ** 2 / v[0] - (Z - m[1]) ** 2 / v[1])
        return np.log(self.priors[1] / self.priors[0]) + per_feature.sum(axis=1)

    def _score(self, Z):
        # P(hit | x) = sigmoid(log-joint difference), stable for either sign.
        return expit(self.log_odds(Z))

    def params(self):
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }
