# %% [markdown]
# # ROC curves, ties and folds
#
# AUC is the area under a step curve that admits one score at a time. Tied
# scores are admitted together, which draws a diagonal segment and counts that
# pair as half a win. The trapezoid area then equals the Mann-Whitney
# statistic.

# %%
import tempfile
from pathlib import Path

import numpy as np

from hitpredict import ModelSpec, cross_validate, emit_report, roc_curve, stratified_folds
from hitpredict.features import Dataset, InstanceId
from hitpredict.canonicalize import SongKey

scores = np.array([0.9, 0.7, 0.7, 0.4, 0.4, 0.4, 0.1])
labels = np.array([1, 1, 0, 1, 0, 0, 0])
roc = roc_curve(scores, labels)
print("points:", roc.points)
pos, neg = scores[labels == 1], scores[labels == 0]
mw = np.mean([(p > q) + 0.5 * (p == q) for p in pos for q in neg])
print(f"trapezoid {roc.auc:.6f}  pair counting {mw:.6f}")

# %% [markdown]
# Stratified folds shuffle each class and deal it round-robin, so every fold
# gets close to the overall hit rate even with few positives.

# %%
y = np.r_[np.ones(13, int), np.zeros(57, int)]
folds = stratified_folds(y, k=5, seed=0)
for f in range(5):
    rows = folds.test_rows(f)
    print(f"fold {f}: {len(rows)} rows, {int(y[rows].sum())} positives")

# %% [markdown]
# Per-fold AUCs are averaged for the headline number. The held-out scores from
# all folds are also pooled into one ROC, which is what the plots show.

# %%
rng = np.random.default_rng(0)
X = rng.normal(size=(len(y), 4)) + 0.8 * y[:, None] * np.array([1, 0.5, 0, 0])
data = Dataset([InstanceId(SongKey(f"a{i}", "t")) for i in range(len(y))], ("f0", "f1", "f2", "f3"), X, y)
reports = [cross_validate(ModelSpec(a), data, k=5, name="demo") for a in ("tree", "lr")]
for r in reports:
    print(r.spec.short_name, "per-fold", np.round(r.per_fold_auc, 3), "mean", round(r.mean_auc, 3), "pooled", round(r.pooled_roc.auc, 3))

out = Path(tempfile.mkdtemp())
print(sorted(p.name for p in emit_report(reports, out)))
print((out / "auc_table.csv").read_text())
