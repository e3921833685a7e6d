"""Seeded synthetic chart and scrobble corpora with planted early adopters.

Every (user, song, week) listen count is Poisson(``background_rate``). For
each hit, the early adopters additionally get Poisson(``adopter_strength``)
listens in each of the ``lead_weeks`` weeks before it enters the chart.
Hits enter the main chart at a week drawn uniformly from
``[lead_weeks, weeks)`` and stay in the top ``top_n`` from then on; non-hits
only ever show up on the bubbling chart.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hitpredict._csvio import write_csv
from hitpredict._dates import DateWindow, monday_of
from hitpredict.canonicalize import make_song_key
from hitpredict.charts import CHART_HEADER
from hitpredict.errors import DataError
from hitpredict.scrobbles import SCROBBLE_HEADER

WEEK_SECONDS = 7 * 86400


@dataclass(frozen=True)
class SynthConfig:
    n_songs: int = 200
    n_hit_songs: int = 40
    n_users: int = 300
    n_early_adopters: int = 30
    weeks: int = 12
    adopter_strength: float = 2.0
    background_rate: float = 0.2
    lead_weeks: int = 6
    seed: int = 42
    start: dt.date = dt.date(2013, 4, 15)
    top_n: int = 20

    def __post_init__(self):
        if isinstance(self.start, str):
            object.__setattr__(self, "start", dt.date.fromisoformat(self.start))
        object.__setattr__(self, "start", monday_of(self.start))
        if min(self.n_songs, self.n_users, self.weeks) < 1:
            raise ValueError("n_songs, n_users and weeks must be positive")
        if not 0 <= self.n_hit_songs <= self.n_songs:
            raise ValueError("need 0 <= n_hit_songs <= n_songs")
        if not 0 <= self.n_early_adopters <= self.n_users:
            raise ValueError("need 0 <= n_early_adopters <= n_users")
        if not 0 <= self.lead_weeks < self.weeks:
            raise ValueError("need 0 <= lead_weeks < weeks")
        if self.adopter_strength < 0 or self.background_rate < 0:
            raise ValueError("rates must be non-negative")
        if not 1 <= self.top_n <= 50:
            raise ValueError("top_n must be in 1..50")

    @property
    def window(self) -> DateWindow:
        return DateWindow(self.start, self.start + dt.timedelta(days=7 * self.weeks - 1))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["start"] = self.start.isoformat()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SynthConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SynthCorpus:
    charts_csv: str
    scrobbles_csv: str
    truth: dict

    def truth_json(self) -> str:
        return json.dumps(self.truth, sort_keys=True, indent=1) + "\n"

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"charts": out / "charts.csv", "scrobbles": out / "scrobbles.csv", "truth": out / "truth.json"}
        paths["charts"].write_text(self.charts_csv, encoding="utf-8", newline="")
        paths["scrobbles"].write_text(self.scrobbles_csv, encoding="utf-8", newline="")
        paths["truth"].write_text(self.truth_json(), encoding="utf-8", newline="")
        return paths


def generate(config: SynthConfig) -> SynthCorpus:
    c = config
    if c.n_hit_songs == 0 or c.n_hit_songs == c.n_songs:
        raise DataError("config leaves one class empty: need 0 < n_hit_songs < n_songs")
    rng = np.random.default_rng(c.seed)
    width = max(3, len(str(max(c.n_songs, c.n_users))))
    artists = [f"Artist {i:0{width}d}" for i in range(c.n_songs)]
    titles = [f"Track {i:0{width}d}" for i in range(c.n_songs)]
    users = [f"user{j:0{width}d}" for j in range(c.n_users)]

    hits = np.sort(rng.choice(c.n_songs, c.n_hit_songs, replace=False))
    entry = rng.integers(c.lead_weeks, c.weeks, size=len(hits))
    adopters = np.sort(rng.choice(c.n_users, c.n_early_adopters, replace=False))
    is_hit = np.zeros(c.n_songs, dtype=bool)
    is_hit[hits] = True
    nonhits = np.flatnonzero(~is_hit)
    bubble_week = rng.integers(0, c.weeks, size=len(nonhits))

    week_dates = [c.start + dt.timedelta(days=7 * w) for w in range(c.weeks)]

    # charts
    chart_rows = []
    for w, day in enumerate(week_dates):
        on_chart = hits[entry <= w]
        positions = rng.integers(1, c.top_n + 1, size=len(on_chart))
        for pos, s in sorted(zip(positions.tolist(), on_chart.tolist())):
            chart_rows.append([day.isoformat(), "main", pos, artists[s], titles[s]])
        bubbling = np.concatenate([nonhits[bubble_week == w], hits[entry - 1 == w]])
        positions = rng.integers(1, 21, size=len(bubbling))
        for pos, s in sorted(zip(positions.tolist(), bubbling.tolist())):
            chart_rows.append([day.isoformat(), "bubbling", pos, artists[s], titles[s]])

    # listens
    stamps, user_ix, song_ix = [], [], []
    for w in range(c.weeks):
        counts = rng.poisson(c.background_rate, size=(c.n_songs, c.n_users))
        leading = hits[(entry - c.lead_weeks <= w) & (w < entry)]
        if len(leading) and len(adopters):
            extra = rng.poisson(c.adopter_strength, size=(len(leading), len(adopters)))
            counts[np.ix_(leading, adopters)] += extra
        s_nz, u_nz = np.nonzero(counts)
        reps = counts[s_nz, u_nz]
        s_rep = np.repeat(s_nz, reps)
        u_rep = np.repeat(u_nz, reps)
        offsets = rng.integers(0, WEEK_SECONDS, size=len(s_rep))
        stamps.append(w * WEEK_SECONDS + offsets)
        song_ix.append(s_rep)
        user_ix.append(u_rep)
    stamps = np.concatenate(stamps)
    song_ix = np.concatenate(song_ix)
    user_ix = np.concatenate(user_ix)
    order = np.lexsort((song_ix, user_ix, stamps))

    origin = dt.datetime.combine(c.start, dt.time(), tzinfo=dt.timezone.utc)
    scrobble_rows = (
        [
            (origin + dt.timedelta(seconds=int(stamps[i]))).strftime("%Y-%m-%dT%H:%M:%SZ"),
            users[user_ix[i]],
            artists[song_ix[i]],
            titles[song_ix[i]],
        ]
        for i in order
    )

    def key(s):
        k = make_song_key(artists[s], titles[s])
        return {"artist": k.artist, "title": k.title}

    truth = {
        "config": c.to_dict(),
        "window": str(c.window),
        "hits": [dict(key(s), first_hit_week=week_dates[e].isoformat()) for s, e in zip(hits.tolist(), entry.tolist())],
        "nonhits": [key(s) for s in nonhits.tolist()],
        "adopters": [users[j] for j in adopters.tolist()],
        "n_scrobbles": int(len(stamps)),
    }
    return SynthCorpus(write_csv(CHART_HEADER, chart_rows), write_csv(SCROBBLE_HEADER, scrobble_rows), truth)
