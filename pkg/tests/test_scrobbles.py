import datetime as dt
import io
import json
import random

import pytest

from hitpredict._dates import DateWindow
from hitpredict.canonicalize import SongKey
from hitpredict.errors import FormatError
from hitpredict.scrobbles import Scrobble, clean_scrobbles, parse_scrobbles, parse_timestamp, scrobbles_csv

HEADER = "timestamp,user,artist,title\n"
UTC = dt.timezone.utc
WINDOW = DateWindow(dt.date(2013, 4, 16), dt.date(2013, 11, 16))


def test_parse_row():
    result = parse_scrobbles(io.StringIO(HEADER + "2013-05-02T20:15:00Z,u42,DJ One,Hit Song\n"))
    assert list(result) == [Scrobble(dt.datetime(2013, 5, 2, 20, 15, tzinfo=UTC), "u42", SongKey("dj one", "hit song"))]


def test_bad_rows():
    good = "".join(f"2013-05-02T20:15:{i:02d}Z,u{i},A,B\n" for i in range(20))
    text = HEADER + good + "2013-05-02T20:15:00Z,,X,Y\nnot-a-date,u1,X,Y\n"
    result = parse_scrobbles(io.StringIO(text))
    assert len(result) == 20
    assert [(r.line, r.reason) for r in result.rejects] == [(22, "empty user"), (23, "bad timestamp 'not-a-date'")]


def test_timestamps_normalized_to_utc():
    assert parse_timestamp("2013-05-02T22:15:00+02:00") == dt.datetime(2013, 5, 2, 20, 15, tzinfo=UTC)
    with pytest.raises(ValueError):
        parse_timestamp("2013-05-02T20:15:00")


def test_bad_header():
    with pytest.raises(FormatError):
        parse_scrobbles(io.StringIO("time,user,artist,title\n"))


def s(sec, user="u", artist="a", day=dt.date(2013, 5, 1)):
    return Scrobble(dt.datetime.combine(day, dt.time(), UTC) + dt.timedelta(seconds=sec), user, SongKey(artist, "t"))


def test_clean_examples():
    early = s(0, day=dt.date(2013, 4, 1))
    out = clean_scrobbles([s(5), s(5), s(6), early], WINDOW)
    assert list(out) == [s(5), s(6)]
    assert out.dropped_by_reason == {"duplicate": 1, "out_of_window": 1}
    assert out.summary() == {"input": 4, "retained": 2, "dropped_by_reason": {"duplicate": 1, "out_of_window": 1}}


def test_near_duplicates_optional():
    raw = [s(0), s(10), s(100)]
    assert len(clean_scrobbles(raw, WINDOW)) == 3
    out = clean_scrobbles(raw, WINDOW, near_duplicate_seconds=30)
    assert list(out) == [s(0), s(100)]
    assert out.dropped_by_reason["near_duplicate"] == 1


@pytest.mark.parametrize("seed", range(20))
def test_clean_properties(seed):
    rng = random.Random(seed)
    days = [dt.date(2013, 4, 10), dt.date(2013, 5, 1), dt.date(2013, 11, 16), dt.date(2013, 11, 20)]
    raw = [
        s(rng.randrange(5), rng.choice("uvw"), rng.choice("ab"), rng.choice(days))
        for _ in range(rng.randrange(1, 60))
    ]
    once = clean_scrobbles(raw, WINDOW)
    assert list(clean_scrobbles(once, WINDOW)) == list(once)
    assert len(once) <= len(raw)
    assert sum(once.dropped_by_reason.values()) == len(raw) - len(once)
    keys = [(x.timestamp, x.user, x.song) for x in once]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_csv_roundtrip():
    cleaned = clean_scrobbles([s(3, "u1"), s(1, "u2", "x y")], WINDOW)
    again = parse_scrobbles(io.StringIO(scrobbles_csv(cleaned)))
    assert list(again) == list(cleaned)
    assert json.loads(cleaned.summary_json())["retained"] == 2
