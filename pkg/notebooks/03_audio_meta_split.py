# %% [markdown]
# # Meta features versus audio-only features
#
# Precomputed descriptors such as danceability or hotness are tied closely to
# popularity. Dropping them leaves only the low-level audio descriptors. This
# script builds both datasets from the same table and compares learners. The
# table is made up on the spot: hotness tracks the label, the audio columns are
# weakly informative, and one value is missing.

# %%
import io

import numpy as np

from hitpredict import ModelSpec, cross_validate
from hitpredict.canonicalize import SongKey
from hitpredict.charts import HitClass, LabelTable, SongLabel
from hitpredict.features import build_audio_dataset

rng = np.random.default_rng(3)
n = 160
is_hit = rng.random(n) < 0.3
hotness = np.clip(0.5 + 0.25 * is_hit + rng.normal(0, 0.15, n), 0, 1)
danceability = np.clip(0.5 + 0.1 * is_hit + rng.normal(0, 0.2, n), 0, 1)
audio = rng.normal(size=(n, 6)) + 0.35 * is_hit[:, None] * (np.arange(6) < 2)

lines = ["artist,title,danceability,hotness," + ",".join(f"mfcc{j}" for j in range(6))]
for i in range(n):
    cells = [f"{danceability[i]:.4f}", "" if i == 7 else f"{hotness[i]:.4f}"] + [f"{v:.4f}" for v in audio[i]]
    lines.append(f"Artist {i},Song {i}," + ",".join(cells))
table = "\n".join(lines) + "\n"

labels = LabelTable({
    SongKey(f"artist {i}", f"song {i}"): SongLabel(HitClass.HIT, "2013-05-06") if is_hit[i] else SongLabel(HitClass.NONHIT)
    for i in range(n)
})

# %%
meta_names = ["danceability", "hotness"]
full = build_audio_dataset(io.StringIO(table), labels, "meta", meta_names)
audio_only = build_audio_dataset(io.StringIO(table), labels, "audio", meta_names)
print("full:", full.shape, "missing values:", full.has_missing)
print("audio only:", audio_only.shape, audio_only.feature_names)

# %% [markdown]
# The missing hotness value is imputed with the training-fold mean inside
# each model, so no statistic from the held-out fold leaks into training.

# %%
for name, d in (("meta", full), ("audio", audio_only)):
    row = {a: round(cross_validate(ModelSpec(a), d, k=10).mean_auc, 3) for a in ("tree", "rules", "nb", "lr", "svm")}
    print(name, row)
