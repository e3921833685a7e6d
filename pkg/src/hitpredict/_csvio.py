"""Row-level CSV reading with a rejects report, shared by the ingest modules."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, TextIO, TypeVar

from hitpredict.errors import DataError, FormatError, RejectedRecordError

T = TypeVar("T")

DEFAULT_MAX_REJECT_FRACTION = 0.10


@dataclass
class Reject:
    line: int
    reason: str


@dataclass
class IngestResult(Sequence[T]):
    """Parsed records plus the rows that were rejected, by file line number (header is line 1)."""

    records: list[T]
    rejects: list[Reject] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self) -> Iterator[T]:
        return iter(self.records)

    @property
    def rows_read(self) -> int:
        return len(self.records) + len(self.rejects)

    def rejects_csv(self) -> str:
        return write_csv(["line", "reason"], ([r.line, r.reason] for r in self.rejects))


def read_records(
    stream: TextIO,
    header: Sequence[str],
    parse_row: Callable[[dict[str, str]], T],
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
    source: str = "<stream>",
) -> IngestResult[T]:
    reader = csv.reader(stream)
    try:
        found = next(reader)
    except StopIteration:
        raise FormatError(f"{source}: empty file, expected header {','.join(header)}") from None
    found = [h.strip().lstrip("\ufeff") for h in found]
    if found != list(header):
        raise FormatError(f"{source}:1: bad header {','.join(found)!r}, expected {','.join(header)!r}")

    result: IngestResult[T] = IngestResult([])
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            result.rejects.append(Reject(lineno, f"expected {len(header)} fields, got {len(row)}"))
            continue
        try:
            result.records.append(parse_row(dict(zip(header, row))))
        except (RejectedRecordError, ValueError) as exc:
            result.rejects.append(Reject(lineno, str(exc)))

    total = result.rows_read
    if total and len(result.rejects) / total > max_reject_fraction:
        first = result.rejects[0]
        raise DataError(
            f"{source}: {len(result.rejects)}/{total} rows rejected "
            f"(limit {max_reject_fraction:.0%}); first at line {first.line}: {first.reason}"
        )
    return result


def write_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()
