"""Model inputs: the (song, week) x user listening matrix and per-song audio tables.

Listening rows are labeled 1 while a song is not yet a hit but will become
one, and 0 for every week of a non-hit. Hit-song weeks at or after chart
entry leak the outcome and are excluded unless ``include_post_hit`` is set,
in which case they are kept as 0.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy import sparse

from hitpredict._csvio import DEFAULT_MAX_REJECT_FRACTION, Reject, write_csv
from hitpredict._dates import DateWindow, monday_of
from hitpredict.canonicalize import SongKey, make_song_key
from hitpredict.charts import LabelTable
from hitpredict.errors import DataError, FormatError, RejectedRecordError
from hitpredict.scrobbles import Scrobble

MISSING_MARKERS = frozenset({"", "nan", "na", "n/a", "?", "null"})


class CountMode(str, enum.Enum):
    CUMULATIVE = "cumulative"
    WEEKLY = "weekly"


class FeatureSet(str, enum.Enum):
    META = "meta"
    AUDIO = "audio"


@dataclass(frozen=True, order=True)
class InstanceId:
    song: SongKey
    week_start: dt.date | None = None

    def to_list(self) -> list:
        return [self.song.artist, self.song.title, self.week_start.isoformat() if self.week_start else None]

    @classmethod
    def from_list(cls, item: Sequence) -> "InstanceId":
        artist, title, week = item
        return cls(SongKey(artist, title), dt.date.fromisoformat(week) if week else None)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Instance-major feature matrix with aligned labels.

    ``values`` is a dense float array or a CSR matrix. Dense audio data may
    carry NaN as a missing marker; those are imputed per training fold.
    """

    instances: tuple[InstanceId, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray | sparse.csr_matrix
    labels: np.ndarray
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int8))
        self.validate()

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.values)

    @property
    def has_missing(self) -> bool:
        data = self.values.data if self.is_sparse else self.values
        return bool(np.isnan(data).any())

    def validate(self) -> None:
        n, m = self.values.shape
        if not (len(self.instances) == len(self.labels) == n):
            raise DataError(f"{len(self.instances)} instances, {len(self.labels)} labels, {n} matrix rows")
        if len(self.feature_names) != m:
            raise DataError(f"{len(self.feature_names)} feature names for {m} columns")
        if m == 0:
            raise DataError("dataset has no features")
        if len(set(self.feature_names)) != m:
            dupes = sorted(k for k, c in Counter(self.feature_names).items() if c > 1)
            raise DataError(f"duplicate feature names: {dupes[:10]}")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        data = self.values.data if self.is_sparse else self.values
        if np.isinf(data).any():
            raise DataError("infinite feature values")
        for cls, name in ((1, "hit (label 1)"), (0, "non-hit (label 0)")):
            if not (self.labels == cls).any():
                raise DataError(f"dataset has no {name} instances")

    def dense(self, rows: np.ndarray | None = None) -> np.ndarray:
        values = self.values if rows is None else self.values[rows]
        if sparse.issparse(values):
            return values.toarray().astype(np.float64)
        return np.asarray(values, dtype=np.float64)

    def subset(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(
            tuple(self.instances[i] for i in rows),
            self.feature_names,
            self.values[rows],
            self.labels[rows],
            dict(self.report),
        )


# --------------------------------------------------------------------------
# listening data


def build_listening_dataset(
    scrobbles: Iterable[Scrobble],
    labels: LabelTable,
    window: DateWindow,
    count_mode: CountMode | str = CountMode.CUMULATIVE,
    include_post_hit: bool = False,
) -> Dataset:
    """One row per (song, week), one column per user, cells are listen counts.

    In cumulative mode a row exists from the song's first scrobble week
    onward and counts everything up to and including that week; in weekly
    mode only weeks with a scrobble get a row and cells count that week alone.
    """
    count_mode = CountMode(count_mode)
    weeks = window.weeks()
    origin = weeks[0]

    drops: Counter = Counter()
    kept: list[Scrobble] = []
    for s in scrobbles:
        if s.song not in labels:
            drops["song_not_labeled"] += 1
        elif s.timestamp.date() not in window:
            drops["out_of_window"] += 1
        else:
            kept.append(s)
    n_in = len(kept) + sum(drops.values())
    if not kept:
        raise DataError("no scrobbled song appears in the label table")

    songs = sorted({s.song for s in kept})
    users = sorted({s.user for s in kept})
    song_ix = {k: i for i, k in enumerate(songs)}
    user_ix = {u: i for i, u in enumerate(users)}
    n_weeks, n_users = len(weeks), len(users)

    s_idx = np.fromiter((song_ix[s.song] for s in kept), dtype=np.int64, count=len(kept))
    u_idx = np.fromiter((user_ix[s.user] for s in kept), dtype=np.int64, count=len(kept))
    w_idx = np.fromiter(
        ((monday_of(s.timestamp.date()) - origin).days // 7 for s in kept), dtype=np.int64, count=len(kept)
    )
    order = np.lexsort((u_idx, w_idx, s_idx))
    s_idx, u_idx, w_idx = s_idx[order], u_idx[order], w_idx[order]
    song_bounds = np.searchsorted(s_idx, np.arange(len(songs) + 1))

    instances: list[InstanceId] = []
    row_labels: list[int] = []
    rows, cols, vals = [], [], []
    excluded_post_hit = 0
    for si, song in enumerate(songs):
        lo, hi = song_bounds[si], song_bounds[si + 1]
        local_users, local_u = np.unique(u_idx[lo:hi], return_inverse=True)
        grid = np.zeros((n_weeks, len(local_users)), dtype=np.float64)
        np.add.at(grid, (w_idx[lo:hi], local_u), 1.0)
        if count_mode is CountMode.CUMULATIVE:
            grid = np.cumsum(grid, axis=0)
        active = grid.sum(axis=1) > 0

        label = labels[song]
        for wi in np.flatnonzero(active):
            week = weeks[wi]
            if label.is_hit and week >= label.first_hit_week:
                if not include_post_hit:
                    excluded_post_hit += 1
                    continue
                y = 0
            else:
                y = int(label.is_hit)
            nz = np.flatnonzero(grid[wi])
            rows.append(np.full(len(nz), len(instances), dtype=np.int64))
            cols.append(local_users[nz])
            vals.append(grid[wi, nz])
            instances.append(InstanceId(song, week))
            row_labels.append(y)

    if not instances:
        raise DataError("no listening instances left after excluding post-hit weeks")
    matrix = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(instances), n_users),
    )
    matrix.sort_indices()
    report = {
        "kind": "listening",
        "count_mode": count_mode.value,
        "include_post_hit": include_post_hit,
        "window": str(window),
        "join": {
            "scrobbles_in": n_in,
            "scrobbles_kept": len(kept),
            "scrobbles_dropped": dict(sorted(drops.items())),
            "songs_kept": len(songs),
            "labeled_songs_without_scrobbles": len(labels) - len(songs),
        },
        "rows": len(instances),
        "positives": int(sum(row_labels)),
        "post_hit_rows_excluded": excluded_post_hit,
    }
    _require_both_classes(row_labels)
    return Dataset(tuple(instances), tuple(users), matrix, np.array(row_labels, dtype=np.int8), report)


def _require_both_classes(labels: Sequence[int]) -> None:
    n_pos = sum(labels)
    if n_pos == 0:
        raise DataError("dataset has no hit (label 1) instances")
    if n_pos == len(labels):
        raise DataError("dataset has no non-hit (label 0) instances")


# --------------------------------------------------------------------------
# audio data


def _parse_cell(text: str) -> float:
    t = text.strip()
    if t.lower() in MISSING_MARKERS:
        return math.nan
    value = float(t)
    if math.isinf(value):
        raise ValueError(f"infinite value {text!r}")
    return value


def build_audio_dataset(
    stream: TextIO,
    labels: LabelTable,
    feature_set: FeatureSet | str = FeatureSet.META,
    meta_feature_names: Iterable[str] = (),
    featuring: Iterable[str] | None = None,
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
    source: str = "<audio>",
) -> Dataset:
    """Per-song audio features joined to the label table.

    ``feature_set="audio"`` drops ``meta_feature_names`` (e.g. danceability,
    hotness); ``"meta"`` keeps every column. Missing cells become NaN.
    """
    feature_set = FeatureSet(feature_set)
    meta = set(meta_feature_names)
    if feature_set is FeatureSet.AUDIO and not meta:
        raise DataError("feature_set 'audio' needs a non-empty list of meta features to drop")

    reader = csv.reader(stream)
    try:
        header = [h.strip().lstrip("\ufeff") for h in next(reader)]
    except StopIteration:
        raise FormatError(f"{source}: empty file") from None
    if header[:2] != ["artist", "title"] or len(header) < 3:
        raise FormatError(f"{source}:1: header must start with artist,title followed by feature columns")
    names = header[2:]
    if len(set(names)) != len(names):
        raise FormatError(f"{source}:1: duplicate feature columns")
    if feature_set is FeatureSet.AUDIO:
        unknown = sorted(meta - set(names))
        if unknown:
            raise FormatError(f"{source}: meta features not in header: {unknown}")

    featuring = None if featuring is None else frozenset(featuring)
    rejects: list[Reject] = []
    drops: Counter = Counter()
    seen: set[SongKey] = set()
    keys: list[SongKey] = []
    table: list[list[float]] = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            rejects.append(Reject(lineno, f"expected {len(header)} fields, got {len(row)}"))
            continue
        try:
            key = make_song_key(row[0], row[1], featuring)
            values = [_parse_cell(c) for c in row[2:]]
        except (RejectedRecordError, ValueError) as exc:
            rejects.append(Reject(lineno, str(exc)))
            continue
        if key not in labels:
            drops["song_not_labeled"] += 1
        elif key in seen:
            drops["duplicate_song"] += 1
        else:
            seen.add(key)
            keys.append(key)
            table.append(values)

    rows_in = len(keys) + sum(drops.values()) + len(rejects)
    if rows_in and len(rejects) / rows_in > max_reject_fraction:
        raise DataError(
            f"{source}: {len(rejects)}/{rows_in} rows rejected; first at line {rejects[0].line}: {rejects[0].reason}"
        )
    if not keys:
        raise DataError(f"{source}: no song overlaps the label table")

    order = sorted(range(len(keys)), key=keys.__getitem__)
    values = np.array([table[i] for i in order], dtype=np.float64)
    instances = tuple(InstanceId(keys[i]) for i in order)
    y = np.array([int(labels[keys[i]].is_hit) for i in order], dtype=np.int8)
    _require_both_classes(y.tolist())
    report = {
        "kind": "audio",
        "feature_set": feature_set.value,
        "join": {
            "rows_in": rows_in,
            "rows_kept": len(keys),
            "rows_dropped": dict(sorted(drops.items())),
            "rows_rejected": len(rejects),
        },
        "rejects": [[r.line, r.reason] for r in rejects],
        "missing_cells": int(np.isnan(values).sum()),
        "rows": len(keys),
        "positives": int(y.sum()),
    }
    d = Dataset(instances, tuple(names), values, y, report)
    if feature_set is FeatureSet.AUDIO:
        d = filter_features(d, meta)
    return d


def filter_features(d: Dataset, drop: Iterable[str]) -> Dataset:
    drop = set(drop)
    unknown = sorted(drop - set(d.feature_names))
    if unknown:
        raise DataError(f"unknown features to drop: {unknown}")
    if not drop:
        return d
    keep = [i for i, name in enumerate(d.feature_names) if name not in drop]
    if not keep:
        raise DataError("dropping every feature leaves an empty dataset")
    report = dict(d.report, dropped_features=sorted(drop))
    return replace(d, feature_names=tuple(d.feature_names[i] for i in keep), values=d.values[:, keep], report=report)


# --------------------------------------------------------------------------
# on-disk layout


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def save_dataset(d: Dataset, out_dir: str | Path, config: dict | None = None, digests: dict | None = None) -> Path:
    """Write ``features.csv`` (dense) or ``features.sparse.csv`` (triples) plus ``meta.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if d.is_sparse:
        coo = d.values.tocoo()
        order = np.lexsort((coo.col, coo.row))
        body = write_csv(
            ["row", "col", "value"],
            ([int(coo.row[i]), int(coo.col[i]), _fmt(coo.data[i])] for i in order),
        )
        (out / "features.sparse.csv").write_text(body, encoding="utf-8", newline="")
        layout = "sparse"
    else:
        body = write_csv(d.feature_names, ([_fmt(x) for x in row] for row in d.values))
        (out / "features.csv").write_text(body, encoding="utf-8", newline="")
        layout = "dense"
    meta = {
        "layout": layout,
        "shape": list(d.shape),
        "feature_names": list(d.feature_names),
        "instances": [inst.to_list() for inst in d.instances],
        "labels": d.labels.tolist(),
        "report": d.report,
        "build_config": config or {},
        "input_digests": digests or {},
    }
    (out / "meta.json").write_text(json.dumps(meta, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")
    return out


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    try:
        meta = json.loads((path / "meta.json").read_text(encoding="utf-8"))
        n, m = meta["shape"]
        if meta["layout"] == "sparse":
            with open(path / "features.sparse.csv", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                if next(reader) != ["row", "col", "value"]:
                    raise FormatError(f"{path}/features.sparse.csv: bad header")
                triples = [(int(r), int(c), float(v)) for r, c, v in reader]
            r, c, v = (np.array(t) for t in zip(*triples)) if triples else ([], [], [])
            values = sparse.csr_matrix((v, (r, c)), shape=(n, m), dtype=np.float64)
        else:
            with open(path / "features.csv", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                if next(reader) != meta["feature_names"]:
                    raise FormatError(f"{path}/features.csv: header does not match meta.json")
                values = np.array([[_parse_cell(x) for x in row] for row in reader], dtype=np.float64)
            values = values.reshape(n, m)
        return Dataset(
            tuple(InstanceId.from_list(i) for i in meta["instances"]),
            tuple(meta["feature_names"]),
            values,
            np.array(meta["labels"], dtype=np.int8),
            meta.get("report", {}),
        )
    except FileNotFoundError as exc:
        raise FormatError(f"{path}: not a dataset directory ({exc.filename} missing)") from exc
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: malformed dataset: {exc}") from exc
