"""The five classifier families behind one ``train`` / ``score`` interface."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hitpredict.errors import FormatError, TrainingError
from hitpredict.features import Dataset
from hitpredict.learners.base import Preprocessor, TrainedModel, check_finite, training_fingerprint
from hitpredict.learners.logistic import LogisticModel, fit_logistic
from hitpredict.learners.naive_bayes import NaiveBayesModel, fit_gaussian_nb
from hitpredict.learners.rules import RuleListModel, fit_rule_list
from hitpredict.learners.svm import SvmModel, fit_linear_svm
from hitpredict.learners.tree import TreeModel, fit_tree

DEFAULTS: dict[str, dict] = {
    "logistic": {"l2": 1e-4, "max_epochs": 500, "tol": 1e-6},
    "naive_bayes": {"var_floor": 1e-9},
    "linear_svm": {"C": 1.0, "epochs": 200},
    "decision_tree": {"max_depth": 20, "min_leaf": 2},
    "rule_list": {"grow_fraction": 2 / 3},
}

ALIASES = {
    "lr": "logistic",
    "nb": "naive_bayes",
    "svm": "linear_svm",
    "tree": "decision_tree",
    "c4.5": "decision_tree",
    "rules": "rule_list",
    "rr": "rule_list",
    "ripper": "rule_list",
}

# Column headings used in result tables, in display order.
SHORT_NAMES = {
    "decision_tree": "C4.5",
    "rule_list": "RR",
    "naive_bayes": "NB",
    "logistic": "LR",
    "linear_svm": "SVM",
}

STANDARDIZED = {"logistic", "naive_bayes", "linear_svm"}

_MODEL_TYPES = {cls.algorithm: cls for cls in (LogisticModel, NaiveBayesModel, SvmModel, TreeModel, RuleListModel)}


def resolve_algorithm(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in DEFAULTS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(set(DEFAULTS) | set(ALIASES))}")
    return key


def _check_ranges(algorithm: str, hp: dict) -> None:
    rules = {
        "l2": lambda v: v >= 0,
        "max_epochs": lambda v: int(v) == v and v >= 1,
        "tol": lambda v: v >= 0,
        "var_floor": lambda v: v > 0,
        "C": lambda v: v > 0,
        "epochs": lambda v: int(v) == v and v >= 1,
        "max_depth": lambda v: int(v) == v and v >= 1,
        "min_leaf": lambda v: int(v) == v and v >= 1,
        "grow_fraction": lambda v: 0 < v < 1,
    }
    unknown = set(hp) - set(DEFAULTS[algorithm])
    if unknown:
        raise ValueError(f"unknown hyperparameters for {algorithm}: {sorted(unknown)}")
    for key, value in hp.items():
        if not rules[key](value):
            raise ValueError(f"{algorithm}: {key}={value!r} out of range")


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 42

    def __post_init__(self):
        algorithm = resolve_algorithm(self.algorithm)
        hp = {**DEFAULTS[algorithm], **self.hyperparameters}
        _check_ranges(algorithm, hp)
        object.__setattr__(self, "algorithm", algorithm)
        object.__setattr__(self, "hyperparameters", hp)

    @property
    def short_name(self) -> str:
        return SHORT_NAMES[self.algorithm]

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "hyperparameters": self.hyperparameters, "seed": self.seed}


def train(spec: ModelSpec, data: Dataset, rows: Sequence[int] | None = None) -> TrainedModel:
    """Fit ``spec`` on the given rows of ``data`` (all rows by default).

    Imputation means and standardization come from these rows only.
    """
    rows = np.arange(len(data.labels)) if rows is None else np.asarray(rows, dtype=np.intp)
    if len(rows) == 0:
        raise TrainingError("empty training subset")
    X = data.dense(rows)
    y = data.labels[rows].astype(np.int64)
    for cls, name in ((1, "hit (1)"), (0, "non-hit (0)")):
        if not (y == cls).any():
            raise TrainingError(f"training subset has no {name} rows")

    prep = Preprocessor.fit(X, standardize=spec.algorithm in STANDARDIZED)
    Z = prep.transform(X)
    check_finite(Z)
    fp = training_fingerprint(X, y)
    hp = spec.hyperparameters

    if spec.algorithm == "logistic":
        w, b = fit_logistic(Z, y, hp["l2"], int(hp["max_epochs"]), hp["tol"])
        return LogisticModel(prep, fp, weights=w, bias=b)
    if spec.algorithm == "naive_bayes":
        priors, means, variances = fit_gaussian_nb(Z, y, hp["var_floor"])
        return NaiveBayesModel(prep, fp, priors=priors, means=means, variances=variances)
    if spec.algorithm == "linear_svm":
        w, b = fit_linear_svm(Z, y, hp["C"], int(hp["epochs"]), spec.seed)
        return SvmModel(prep, fp, weights=w, bias=b)
    if spec.algorithm == "decision_tree":
        nodes = fit_tree(Z, y, int(hp["max_depth"]), int(hp["min_leaf"]))
        return TreeModel(prep, fp, nodes=nodes)
    rules, stats, default = fit_rule_list(Z, y, hp["grow_fraction"], spec.seed)
    return RuleListModel(
        prep,
        fp,
        rules=tuple(tuple(r) for r in rules),
        stats=tuple(stats),
        default=default,
    )


def score(model: TrainedModel, x) -> float:
    """Hit score of one feature vector; higher means more hit-like."""
    return model.score(x)


def model_to_json(model: TrainedModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True)


def model_from_dict(d: dict) -> TrainedModel:
    try:
        cls = _MODEL_TYPES[d["algorithm"]]
        prep = Preprocessor.from_dict(d["preprocessor"])
        p = d["params"]
        fp = d["fingerprint"]
    except KeyError as exc:
        raise FormatError(f"malformed model: missing {exc}") from exc
    if cls is LogisticModel or cls is SvmModel:
        return cls(prep, fp, weights=np.array(p["weights"], dtype=np.float64), bias=float(p["bias"]))
    if cls is NaiveBayesModel:
        return cls(prep, fp, **{k: np.array(v, dtype=np.float64) for k, v in p.items()})
    if cls is TreeModel:
        dtypes = {"threshold": np.float64}
        return cls(prep, fp, nodes={k: np.array(v, dtype=dtypes.get(k, np.int64)) for k, v in p.items()})
    return cls(
        prep,
        fp,
        rules=tuple(tuple((int(j), op, float(t)) for j, op, t in r) for r in p["rules"]),
        stats=tuple(tuple(s) for s in p["stats"]),
        default=tuple(p["default"]),
    )


__all__ = [
    "ALIASES",
    "DEFAULTS",
    "ModelSpec",
    "SHORT_NAMES",
    "TrainedModel",
    "model_from_dict",
    "model_to_json",
    "resolve_algorithm",
    "score",
    "train",
]
