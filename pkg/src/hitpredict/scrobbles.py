"""Listening records: parsing, window filtering and duplicate removal."""

from __future__ import annotations

import datetime as dt
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

from hitpredict._csvio import DEFAULT_MAX_REJECT_FRACTION, IngestResult, read_records, write_csv
from hitpredict._dates import DateWindow
from hitpredict.canonicalize import SongKey, make_song_key
from hitpredict.errors import RejectedRecordError

SCROBBLE_HEADER = ("timestamp", "user", "artist", "title")


@dataclass(frozen=True, order=True)
class Scrobble:
    # Field order is the canonical sort order: (timestamp, user, song).
    timestamp: dt.datetime
    user: str
    song: SongKey


def parse_timestamp(text: str) -> dt.datetime:
    """ISO 8601 with an explicit offset or ``Z``; returned in UTC at second resolution."""
    text = text.strip()
    if text[-1:] in ("Z", "z"):
        text = text[:-1] + "+00:00"
    stamp = dt.datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone")
    return stamp.astimezone(dt.timezone.utc).replace(microsecond=0)


def format_timestamp(stamp: dt.datetime) -> str:
    return stamp.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_scrobbles(
    stream: TextIO,
    featuring: Iterable[str] | None = None,
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
    source: str = "<scrobbles>",
) -> IngestResult[Scrobble]:
    featuring = None if featuring is None else frozenset(featuring)

    def parse_row(row: dict[str, str]) -> Scrobble:
        try:
            stamp = parse_timestamp(row["timestamp"])
        except (ValueError, IndexError):
            raise RejectedRecordError(f"bad timestamp {row['timestamp']!r}") from None
        user = row["user"].strip()
        if not user:
            raise RejectedRecordError("empty user")
        return Scrobble(stamp, user, make_song_key(row["artist"], row["title"], featuring))

    return read_records(stream, SCROBBLE_HEADER, parse_row, max_reject_fraction, source)


@dataclass
class CleanedScrobbles(Sequence[Scrobble]):
    scrobbles: list[Scrobble]
    input_count: int
    dropped_by_reason: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.scrobbles)

    def __getitem__(self, i):
        return self.scrobbles[i]

    def __iter__(self) -> Iterator[Scrobble]:
        return iter(self.scrobbles)

    def summary(self) -> dict:
        return {
            "input": self.input_count,
            "retained": len(self.scrobbles),
            "dropped_by_reason": dict(sorted(self.dropped_by_reason.items())),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def clean_scrobbles(
    raw: Iterable[Scrobble],
    window: DateWindow,
    near_duplicate_seconds: int = 0,
) -> CleanedScrobbles:
    """Keep scrobbles dated inside ``window``, drop exact duplicates, sort.

    With ``near_duplicate_seconds > 0`` a repeat of the same (user, song)
    within that many seconds of the last kept one is also dropped.
    """
    raw = list(raw)
    dropped: Counter = Counter()
    inside = []
    for s in raw:
        if s.timestamp.date() in window:
            inside.append(s)
        else:
            dropped["out_of_window"] += 1

    unique = sorted(set(inside))
    dropped["duplicate"] += len(inside) - len(unique)

    if near_duplicate_seconds > 0:
        last_kept: dict[tuple[str, SongKey], dt.datetime] = {}
        kept = []
        for s in unique:
            prev = last_kept.get((s.user, s.song))
            if prev is not None and (s.timestamp - prev).total_seconds() <= near_duplicate_seconds:
                dropped["near_duplicate"] += 1
                continue
            last_kept[(s.user, s.song)] = s.timestamp
            kept.append(s)
        unique = kept

    return CleanedScrobbles(unique, len(raw), +dropped)


def scrobbles_csv(scrobbles: Iterable[Scrobble]) -> str:
    return write_csv(
        SCROBBLE_HEADER,
        ([format_timestamp(s.timestamp), s.user, s.song.artist, s.song.title] for s in scrobbles),
    )
