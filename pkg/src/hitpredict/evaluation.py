"""Stratified k-fold cross-validation, ROC curves and result files."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from hitpredict._csvio import write_csv
from hitpredict.errors import DataError, HitPredictError
from hitpredict.features import Dataset
from hitpredict.learners import SHORT_NAMES, ModelSpec, train


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    k: int
    fold_of: np.ndarray

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def stratified_folds(labels: Sequence[int], k: int, seed: int) -> FoldAssignment:
    """Shuffle each class with ``seed`` and deal its rows round-robin over ``k`` folds.

    Dealing continues across classes (positives first), so fold sizes differ by
    at most one overall as well as per class.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    fold_of = np.full(len(labels), -1, dtype=np.int64)
    offset = 0
    for cls, name in ((1, "positive"), (0, "negative")):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise DataError(f"{name} class has {len(members)} rows, fewer than k={k}")
        members = rng.permutation(members)
        fold_of[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    if (fold_of < 0).any():
        raise DataError("labels must be 0 or 1")
    return FoldAssignment(k, fold_of)


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_dict(self) -> dict:
        return {"fpr": self.fpr.tolist(), "tpr": self.tpr.tolist(), "thresholds": self.thresholds.tolist(), "auc": self.auc}

    @classmethod
    def from_dict(cls, d: dict) -> "RocCurve":
        return cls(np.array(d["fpr"]), np.array(d["tpr"]), np.array(d["thresholds"]), float(d["auc"]))


def trapezoid_area(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """ROC points from a descending threshold sweep; tied scores form one diagonal step.

    The first point is (0, 0), the threshold of point ``i > 0`` is the score
    admitted at that step, and the area is taken by the trapezoid rule.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D sequences of equal length")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative labels")
    if n_pos + n_neg != len(labels):
        raise ValueError("labels must be 0 or 1")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order] == 1
    group_end = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[group_end]
    fp = (group_end + 1) - tp
    fpr = np.r_[0.0, fp / n_neg]
    tpr = np.r_[0.0, tp / n_pos]
    thresholds = np.r_[np.inf, s[group_end]]
    return RocCurve(fpr, tpr, thresholds, trapezoid_area(fpr, tpr))


def dataset_digest(d: Dataset) -> str:
    h = hashlib.sha256()
    X = d.dense()
    h.update(np.asarray(X.shape, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(X).tobytes())
    h.update(d.labels.tobytes())
    h.update("\x1f".join(d.feature_names).encode("utf-8"))
    return h.hexdigest()


@dataclass(eq=False)
class CvReport:
    spec: ModelSpec
    dataset: str
    k: int
    seed: int
    per_fold_auc: list[float]
    pooled_roc: RocCurve
    fold_sizes: list[int] = field(default_factory=list)
    dataset_digest: str = ""
    unit: str = "instance"

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.per_fold_auc))

    @property
    def name(self) -> str:
        return f"{self.dataset}_{self.spec.short_name}"

    @property
    def seeds(self) -> dict:
        return {"cv": self.seed, "model": self.spec.seed}

    @property
    def config_digest(self) -> str:
        doc = {"spec": self.spec.to_dict(), "k": self.k, "seed": self.seed, "dataset": self.dataset_digest}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "spec": self.spec.to_dict(),
            "k": self.k,
            "seeds": self.seeds,
            "per_fold_auc": self.per_fold_auc,
            "mean_auc": self.mean_auc,
            "pooled_auc": self.pooled_roc.auc,
            "pooled_roc": self.pooled_roc.to_dict(),
            "fold_sizes": self.fold_sizes,
            "dataset_digest": self.dataset_digest,
            "config_digest": self.config_digest,
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvReport":
        s = d["spec"]
        return cls(
            spec=ModelSpec(s["algorithm"], s["hyperparameters"], s["seed"]),
            dataset=d["dataset"],
            k=d["k"],
            seed=d["seeds"]["cv"],
            per_fold_auc=list(d["per_fold_auc"]),
            pooled_roc=RocCurve.from_dict(d["pooled_roc"]),
            fold_sizes=list(d.get("fold_sizes", [])),
            dataset_digest=d.get("dataset_digest", ""),
            unit=d.get("unit", "instance"),
        )


def cross_validate(spec: ModelSpec, data: Dataset, k: int = 10, seed: int = 42, name: str = "dataset") -> CvReport:
    """Per-fold AUC of ``spec`` under stratified k-fold CV, plus the pooled held-out ROC."""
    folds = stratified_folds(data.labels, k, seed)
    fold_auc, fold_sizes = [], []
    all_scores, all_labels = [], []
    for f in range(k):
        test = folds.test_rows(f)
        try:
            model = train(spec, data, folds.train_rows(f))
            scores = model.score_many(data.dense(test))
            fold_auc.append(roc_curve(scores, data.labels[test]).auc)
        except HitPredictError as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        fold_sizes.append(len(test))
        all_scores.append(scores)
        all_labels.append(data.labels[test])
    pooled = roc_curve(np.concatenate(all_scores), np.concatenate(all_labels))
    unit = "song" if all(i.week_start is None for i in data.instances) else "song-week"
    return CvReport(spec, name, k, seed, fold_auc, pooled, fold_sizes, dataset_digest(data), unit)


# --------------------------------------------------------------------------
# files


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_") or "run"


def _num(x: float) -> str:
    return f"{x:.6f}"


def roc_svg(roc: RocCurve, title: str = "", size: int = 360, margin: int = 50) -> str:
    """Pooled ROC as a standalone SVG with axes and the chance diagonal."""
    side = size
    total = side + 2 * margin

    def px(fpr, tpr):
        return f"{margin + fpr * side:.2f},{margin + (1.0 - tpr) * side:.2f}"

    pts = " ".join(px(x, y) for x, y in roc.points)
    ticks = []
    for i in range(6):
        v = i / 5
        x = margin + v * side
        y = margin + (1 - v) * side
        ticks.append(f'<line x1="{x:.2f}" y1="{margin + side}" x2="{x:.2f}" y2="{margin + side + 5}" stroke="black"/>')
        ticks.append(f'<text x="{x:.2f}" y="{margin + side + 18}" font-size="11" text-anchor="middle">{v:.1f}</text>')
        ticks.append(f'<line x1="{margin - 5}" y1="{y:.2f}" x2="{margin}" y2="{y:.2f}" stroke="black"/>')
        ticks.append(f'<text x="{margin - 8}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{v:.1f}</text>')
    label = f"{title} (AUC {roc.auc:.3f})" if title else f"AUC {roc.auc:.3f}"
    mid = margin + side / 2
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">',
            f'<rect x="{margin}" y="{margin}" width="{side}" height="{side}" fill="white" stroke="black"/>',
            f'<line x1="{margin}" y1="{margin + side}" x2="{margin + side}" y2="{margin}" stroke="gray" stroke-dasharray="4 4"/>',
            *ticks,
            f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="2"/>',
            f'<text x="{mid:.2f}" y="{total - 8}" font-size="13" text-anchor="middle">False positive rate</text>',
            f'<text x="14" y="{mid:.2f}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {mid:.2f})">True positive rate</text>',
            f'<text x="{mid:.2f}" y="{margin - 16}" font-size="13" text-anchor="middle">{label}</text>',
            "</svg>",
            "",
        ]
    )


def _table(reports: Sequence[CvReport], value) -> str:
    present = {r.spec.algorithm for r in reports}
    algorithms = [a for a in SHORT_NAMES if a in present]
    datasets = list(dict.fromkeys(r.dataset for r in reports))
    cells = {(r.dataset, r.spec.algorithm): value(r) for r in reports}
    rows = (
        [ds] + [_num(cells[(ds, a)]) if (ds, a) in cells else "" for a in algorithms]
        for ds in datasets
    )
    return write_csv(["dataset"] + [SHORT_NAMES[a] for a in algorithms], rows)


def emit_report(reports: Sequence[CvReport], out_dir: str | Path, input_digests: dict | None = None) -> list[Path]:
    """Write the AUC tables, one ROC csv/svg pair per report, ``cv_<name>.json`` and ``run.json``."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to emit")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc

    files: dict[str, str] = {
        "auc_table.csv": _table(reports, lambda r: r.mean_auc),
        "auc_table_pooled.csv": _table(reports, lambda r: r.pooled_roc.auc),
    }
    for r in reports:
        name = _slug(r.name)
        files[f"roc_{name}.csv"] = write_csv(["fpr", "tpr"], ([repr(x), repr(y)] for x, y in r.pooled_roc.points))
        files[f"roc_{name}.svg"] = roc_svg(r.pooled_roc, f"{r.dataset} / {r.spec.short_name}")
        files[f"cv_{name}.json"] = json.dumps(r.to_dict(), sort_keys=True, indent=1) + "\n"
    run = {
        "reports": [
            {
                "name": r.name,
                "dataset": r.dataset,
                "algorithm": r.spec.algorithm,
                "k": r.k,
                "seeds": r.seeds,
                "mean_auc": r.mean_auc,
                "pooled_auc": r.pooled_roc.auc,
                "unit": r.unit,
                "dataset_digest": r.dataset_digest,
                "config_digest": r.config_digest,
            }
            for r in reports
        ],
        "input_digests": input_digests or {},
    }
    files["run.json"] = json.dumps(run, sort_keys=True, indent=1) + "\n"

    written = []
    try:
        for fname, body in files.items():
            path = out / fname
            path.write_text(body, encoding="utf-8", newline="")
            written.append(path)
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc}") from exc
    return written


def load_reports(run_dir: str | Path) -> list[CvReport]:
    paths = sorted(Path(run_dir).glob("cv_*.json"))
    if not paths:
        raise DataError(f"{run_dir}: no cv_*.json reports")
    return [CvReport.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]
