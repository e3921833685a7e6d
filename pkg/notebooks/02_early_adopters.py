# %% [markdown]
# # Early adopters on a planted corpus
#
# The synthetic generator gives a small group of users extra listens to each
# hit during the weeks before it charts. A listening dataset has one row per
# (song, week) and one column per user. If the adopters matter, a linear model
# should rank pre-hit rows above non-hit rows.

# %%
import io

from hitpredict import ModelSpec, SynthConfig, cross_validate, generate
from hitpredict.charts import build_label_table, parse_chart_csv
from hitpredict.features import build_listening_dataset
from hitpredict.scrobbles import clean_scrobbles, parse_scrobbles

BASE = dict(n_songs=120, n_hit_songs=25, n_users=150, n_early_adopters=20, seed=1)


def dataset(count_mode, **overrides):
    config = SynthConfig(**{**BASE, **overrides})
    corpus = generate(config)
    labels = build_label_table(parse_chart_csv(io.StringIO(corpus.charts_csv)), config.top_n)
    scrobbles = clean_scrobbles(parse_scrobbles(io.StringIO(corpus.scrobbles_csv)), config.window)
    return build_listening_dataset(scrobbles, labels, config.window, count_mode)


signal = dataset("weekly")
print("rows x users:", signal.shape, " positives:", int(signal.labels.sum()))

# %%
for strength in (2.0, 0.0):
    d = signal if strength else dataset("weekly", adopter_strength=0.0)
    aucs = {a: cross_validate(ModelSpec(a), d, k=10).mean_auc for a in ("lr", "tree", "rules")}
    print(f"adopter_strength={strength}:", {k: round(v, 3) for k, v in aucs.items()})

# %% [markdown]
# With no planted adopters every learner drops to about 0.5, which is what we
# want from a null. The tree and rule list also sit near 0.5 there because they
# find nothing to split on.
#
# Cumulative counts behave differently. A row's total keeps growing week by
# week, and pre-hit rows are by construction the early weeks of a hit's life,
# so the total alone gives away the week index. On the null corpus that leak
# is enough for a high AUC that has nothing to do with adopters. Weekly counts
# have no such drift, which is why the acceptance run uses them.

# %%
null_cumulative = dataset("cumulative", adopter_strength=0.0)
print("null corpus, cumulative counts, LR:", round(cross_validate(ModelSpec("lr"), null_cumulative, k=10).mean_auc, 3))
