"""Weekly chart listings and the hit / non-hit label table derived from them.

A song is a hit once it reaches position ``top_n`` or better on the main
chart. Non-hits come from the Bubbling Under chart, minus every song that
later became a hit. Main-chart songs that never reach ``top_n`` and never
bubble are left out: they are neither a clean positive nor a vetted negative.
"""

from __future__ import annotations

import datetime as dt
import enum
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, TextIO

from hitpredict._csvio import DEFAULT_MAX_REJECT_FRACTION, IngestResult, read_records
from hitpredict._dates import DateWindow, monday_of, parse_date
from hitpredict.canonicalize import SongKey, make_song_key
from hitpredict.errors import DataError, FormatError, RejectedRecordError

CHART_HEADER = ("week_start", "chart", "position", "artist", "title")
DEFAULT_TOP_N = 20


class ChartKind(str, enum.Enum):
    MAIN = "main"
    BUBBLING = "bubbling"

    @property
    def max_position(self) -> int:
        return 50 if self is ChartKind.MAIN else 20


@dataclass(frozen=True)
class ChartEntry:
    week_start: dt.date
    chart_kind: ChartKind
    position: int
    song: SongKey


def parse_chart_csv(
    stream: TextIO,
    featuring: Iterable[str] | None = None,
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
    source: str = "<charts>",
) -> IngestResult[ChartEntry]:
    """Parse ``week_start,chart,position,artist,title`` rows.

    Dates are snapped to the Monday of their week. Bad rows are collected in
    ``result.rejects``; a missing header or too many rejects is fatal.
    """
    featuring = None if featuring is None else frozenset(featuring)

    def parse_row(row: dict[str, str]) -> ChartEntry:
        try:
            day = parse_date(row["week_start"])
        except ValueError:
            raise RejectedRecordError(f"bad date {row['week_start']!r}") from None
        try:
            kind = ChartKind(row["chart"].strip().lower())
        except ValueError:
            raise RejectedRecordError(f"unknown chart {row['chart']!r}") from None
        try:
            position = int(row["position"].strip())
        except ValueError:
            raise RejectedRecordError(f"non-integer position {row['position']!r}") from None
        if not 1 <= position <= kind.max_position:
            raise RejectedRecordError(f"position {position} outside 1..{kind.max_position} for {kind.value}")
        return ChartEntry(monday_of(day), kind, position, make_song_key(row["artist"], row["title"], featuring))

    return read_records(stream, CHART_HEADER, parse_row, max_reject_fraction, source)


def filter_window(entries: Iterable[ChartEntry], window: DateWindow) -> list[ChartEntry]:
    return [e for e in entries if e.week_start in window]


class HitClass(str, enum.Enum):
    HIT = "hit"
    NONHIT = "nonhit"


@dataclass(frozen=True)
class SongLabel:
    cls: HitClass
    first_hit_week: dt.date | None = None

    def __post_init__(self):
        if (self.cls is HitClass.HIT) != (self.first_hit_week is not None):
            raise ValueError("first_hit_week must be set exactly for hits")

    @property
    def is_hit(self) -> bool:
        return self.cls is HitClass.HIT


class LabelTable(Mapping[SongKey, SongLabel]):
    """Immutable mapping from song to its outcome."""

    def __init__(self, labels: Mapping[SongKey, SongLabel], top_n: int = DEFAULT_TOP_N):
        self._labels = dict(sorted(labels.items()))
        self.top_n = top_n

    def __getitem__(self, key: SongKey) -> SongLabel:
        return self._labels[key]

    def __iter__(self) -> Iterator[SongKey]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelTable):
            return NotImplemented
        return self.top_n == other.top_n and self._labels == other._labels

    def __repr__(self) -> str:
        return f"LabelTable({len(self.hits())} hits, {len(self.nonhits())} nonhits, top_n={self.top_n})"

    def hits(self) -> list[SongKey]:
        return [k for k, v in self._labels.items() if v.is_hit]

    def nonhits(self) -> list[SongKey]:
        return [k for k, v in self._labels.items() if not v.is_hit]

    def to_json(self) -> str:
        songs = [
            {
                "artist": k.artist,
                "title": k.title,
                "class": v.cls.value,
                "first_hit_week": v.first_hit_week.isoformat() if v.first_hit_week else None,
            }
            for k, v in self._labels.items()
        ]
        return json.dumps({"top_n": self.top_n, "songs": songs}, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LabelTable":
        try:
            doc = json.loads(text)
            labels = {
                SongKey(s["artist"], s["title"]): SongLabel(
                    HitClass(s["class"]),
                    parse_date(s["first_hit_week"]) if s["first_hit_week"] else None,
                )
                for s in doc["songs"]
            }
            return cls(labels, int(doc["top_n"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed label table: {exc}") from exc


def build_label_table(entries: Iterable[ChartEntry], top_n: int = DEFAULT_TOP_N) -> LabelTable:
    entries = list(entries)
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    if not entries:
        raise DataError("no chart entries to label")

    first_hit: dict[SongKey, dt.date] = {}
    bubbled: set[SongKey] = set()
    for e in entries:
        if e.chart_kind is ChartKind.MAIN and e.position <= top_n:
            prev = first_hit.get(e.song)
            if prev is None or e.week_start < prev:
                first_hit[e.song] = e.week_start
        elif e.chart_kind is ChartKind.BUBBLING:
            bubbled.add(e.song)

    labels = {song: SongLabel(HitClass.HIT, week) for song, week in first_hit.items()}
    for song in bubbled - first_hit.keys():
        labels[song] = SongLabel(HitClass.NONHIT)
    return LabelTable(labels, top_n)


def ingest_summary(entries: IngestResult[ChartEntry] | list[ChartEntry], table: LabelTable) -> dict:
    """Counts for the ingest report: listings as well as unique songs."""
    records = list(entries)
    return {
        "entries": len(records),
        "unique_songs": len({e.song for e in records}),
        "labeled_songs": len(table),
        "hits": len(table.hits()),
        "nonhits": len(table.nonhits()),
        "excluded_songs": len({e.song for e in records} - set(table)),
        "top_n": table.top_n,
    }
