# %% [markdown]
# # From raw charts and scrobbles to labels
#
# Chart rows and listening records come from different sources and spell the
# same song differently. Everything is joined on a normalized
# ``(artist, title)`` key, so we start there.

# %%
import datetime as dt
import io

from hitpredict import DateWindow
from hitpredict.canonicalize import make_song_key, normalize_text
from hitpredict.charts import build_label_table, parse_chart_csv
from hitpredict.scrobbles import clean_scrobbles, parse_scrobbles

for raw in ["Daft Punk FT. Pharrell", "daft punk featuring pharrell", "DAFT  PUNK feat pharrell!"]:
    print(f"{raw!r:35} -> {normalize_text(raw)!r}")
print(make_song_key("Avicii", "Wake Me Up (Radio Edit)"))

# %% [markdown]
# Chart files list one row per (week, chart, position). A song is a hit once it
# reaches position 20 or better on the main chart; bubbling-under songs that
# never do are the non-hits. Malformed rows are kept aside with their line
# numbers instead of stopping the run.

# %%
charts = """week_start,chart,position,artist,title
2013-06-03,bubbling,4,Avicii,Wake Me Up
2013-06-10,main,35,Avicii,Wake Me Up
2013-06-17,main,12,AVICII,wake me up!
2013-06-19,main,3,Avicii,Wake Me Up
2013-06-10,bubbling,9,Unknown Band,Almost
2013-06-10,main,eleven,Typo,Row
"""
# a real chart dump fails above 10% bad rows; this toy file needs a looser limit
entries = parse_chart_csv(io.StringIO(charts), max_reject_fraction=0.5)
for reject in entries.rejects:
    print("rejected line", reject.line, "->", reject.reason)
labels = build_label_table(entries, top_n=20)
for song, label in labels.items():
    print(song, label.cls.value, label.first_hit_week)

# %% [markdown]
# Dates are snapped to the Monday of their week, so 2013-06-19 counts as
# the week of 2013-06-17, which is the first top-20 week.
#
# Scrobbles get the same key treatment, then exact duplicates and listens
# outside the study window are dropped. The summary accounts for every input row.

# %%
scrobbles = """timestamp,user,artist,title
2013-06-01T10:00:00Z,ann,Avicii,Wake Me Up
2013-06-01T10:00:00Z,ann,avicii,WAKE ME UP
2013-06-02T08:30:00+02:00,bob,Unknown Band,Almost
2012-01-01T00:00:00Z,bob,Avicii,Wake Me Up
2013-06-05T12:00:00,carl,Avicii,Wake Me Up
"""
raw = parse_scrobbles(io.StringIO(scrobbles), max_reject_fraction=0.5)
print("rejects:", [(r.line, r.reason) for r in raw.rejects])
cleaned = clean_scrobbles(raw, DateWindow(dt.date(2013, 4, 16), dt.date(2013, 11, 16)))
print(cleaned.summary())
