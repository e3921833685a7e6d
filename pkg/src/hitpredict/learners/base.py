"""Shared pieces for all learners: preprocessing, fingerprinting, the model base class."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from hitpredict.errors import InvariantError


@dataclass(frozen=True, eq=False)
class Preprocessor:
    """Training-row column means for imputation, then optional standardization.

    Zero-variance columns get sd 1 so they map to a constant 0.
    """

    fill: np.ndarray
    mean: np.ndarray | None = None
    sd: np.ndarray | None = None

    @classmethod
    def fit(cls, X: np.ndarray, standardize: bool) -> "Preprocessor":
        with np.errstate(invalid="ignore"):
            present = ~np.isnan(X)
            counts = present.sum(axis=0)
            sums = np.where(present, X, 0.0).sum(axis=0)
            fill = np.divide(sums, counts, out=np.zeros(X.shape[1]), where=counts > 0)
        if not standardize:
            return cls(fill)
        filled = np.where(np.isnan(X), fill, X)
        mean = filled.mean(axis=0)
        sd = filled.std(axis=0)
        sd[sd == 0] = 1.0
        return cls(fill, mean, sd)

    @property
    def n_features(self) -> int:
        return len(self.fill)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.where(np.isnan(X), self.fill, X)
        if self.mean is not None:
            out = (out - self.mean) / self.sd
        return out

    def to_dict(self) -> dict:
        return {
            "fill": self.fill.tolist(),
            "mean": None if self.mean is None else self.mean.tolist(),
            "sd": None if self.sd is None else self.sd.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessor":
        arr = lambda v: None if v is None else np.array(v, dtype=np.float64)  # noqa: E731
        return cls(arr(d["fill"]), arr(d["mean"]), arr(d["sd"]))


def training_fingerprint(X: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.asarray(X.shape, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(X, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(y, dtype=np.int8).tobytes())
    return h.hexdigest()


def check_finite(Z: np.ndarray, what: str = "standardized features") -> None:
    if not np.isfinite(Z).all():
        raise InvariantError(f"non-finite {what}")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """A fitted classifier. ``score_many`` returns one hit score per row; higher is more hit-like."""

    algorithm: ClassVar[str] = ""

    preprocessor: Preprocessor
    fingerprint: str

    @property
    def n_features(self) -> int:
        return self.preprocessor.n_features

    def score_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return self._score(self.preprocessor.transform(X))

    def score(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("score expects a single feature vector; use score_many for matrices")
        return float(self.score_many(x[None, :])[0])

    def _score(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "preprocessor": self.preprocessor.to_dict(),
            "fingerprint": self.fingerprint,
            "params": self.params(),
        }
