"""Calendar helpers: UTC Monday week buckets and inclusive date windows."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass


def monday_of(day: dt.date) -> dt.date:
    return day - dt.timedelta(days=day.weekday())


def parse_date(text: str) -> dt.date:
    text = text.strip()
    if len(text) != 10:
        raise ValueError(f"bad date {text!r}, expected YYYY-MM-DD")
    return dt.date.fromisoformat(text)


@dataclass(frozen=True)
class DateWindow:
    """Inclusive calendar-date interval ``[start, end]``."""

    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"window end {self.end} precedes start {self.start}")

    @classmethod
    def parse(cls, text: str) -> "DateWindow":
        """Parse ``YYYY-MM-DD..YYYY-MM-DD``."""
        start, sep, end = text.partition("..")
        if not sep:
            raise ValueError(f"bad window {text!r}, expected START..END")
        return cls(parse_date(start), parse_date(end))

    def __contains__(self, day: dt.date) -> bool:
        return self.start <= day <= self.end

    def weeks(self) -> list[dt.date]:
        """Mondays of every week overlapping the window, in order."""
        out = []
        week = monday_of(self.start)
        while week <= self.end:
            out.append(week)
            week += dt.timedelta(days=7)
        return out

    def __str__(self) -> str:
        return f"{self.start.isoformat()}..{self.end.isoformat()}"


# Chart and listening windows of the original study.
CHART_WINDOW = DateWindow(dt.date(2011, 7, 2), dt.date(2013, 11, 16))
LISTENING_WINDOW = DateWindow(dt.date(2013, 4, 16), dt.date(2013, 11, 16))
