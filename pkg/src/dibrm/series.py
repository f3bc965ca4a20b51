"""Per-user, per-day reputation matrices and their rank places."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Sequence

import numpy as np

from .model import SECONDS_PER_DAY, InteractionEvent

SNAPSHOT_HEADER = ("UserId", "Day", "Value", "Rank")


class SeriesError(ValueError):
    pass


def day_start(day: date) -> int:
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp())


def day_of(ts: int) -> date:
    return datetime.fromtimestamp(ts, timezone.utc).date()


def day_range(first: date, last: date) -> list[date]:
    if last < first:
        raise SeriesError(f"empty day range: {first} .. {last}")
    return [first + timedelta(days=k) for k in range((last - first).days + 1)]


def stream_days(events: Sequence[InteractionEvent]) -> list[date]:
    """Days from the first to the last event, inclusive."""
    if not events:
        return []
    return day_range(day_of(events[0].timestamp), day_of(events[-1].timestamp))


def day_ends(days: Sequence[date]) -> np.ndarray:
    """Exclusive end instant (next UTC midnight) of each day."""
    return np.array([day_start(d) + SECONDS_PER_DAY for d in days], dtype=np.int64)


def stream_users(events: Iterable[InteractionEvent]) -> list:
    return sorted({e.user_id for e in events})


def rank_places(values: np.ndarray) -> np.ndarray:
    """Rank each column descending; ties go to the lower row index.

    Rows are assumed to be ordered by ascending user id.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    order = np.argsort(-values, axis=0, kind="stable")
    ranks = np.empty(values.shape, dtype=np.int64)
    cols = np.arange(values.shape[1])
    ranks[order, cols[None, :]] = np.arange(1, n + 1)[:, None]
    return ranks


@dataclass(frozen=True, eq=False)
class SnapshotSeries:
    users: tuple
    days: tuple
    values: np.ndarray
    ranks: np.ndarray

    @classmethod
    def from_values(cls, users: Sequence, days: Sequence[date], values) -> "SnapshotSeries":
        users = list(users)
        values = np.asarray(values, dtype=float).reshape(len(users), len(days))
        order = sorted(range(len(users)), key=lambda i: users[i])
        users = [users[i] for i in order]
        if len(set(users)) != len(users):
            raise SeriesError("duplicate user ids in universe")
        values = values[order, :] if users else values
        values = np.ascontiguousarray(values)
        return cls(tuple(users), tuple(days), values, rank_places(values))

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_days(self) -> int:
        return len(self.days)

    def check_valid(self) -> None:
        n, d = self.n_users, self.n_days
        if self.values.shape != (n, d) or self.ranks.shape != (n, d):
            raise SeriesError("matrix shape does not match users x days")
        expected = np.arange(1, n + 1)
        if d and not np.all(np.sort(self.ranks, axis=0) == expected[:, None]):
            raise SeriesError("rank columns are not permutations of 1..N")

    def row(self, user) -> np.ndarray:
        return self.values[self.users.index(user)]

    def subset(self, users: Sequence) -> "SnapshotSeries":
        idx = [self.users.index(u) for u in users]
        return SnapshotSeries.from_values([self.users[i] for i in idx], self.days, self.values[idx])


def write_snapshot_csv(series: SnapshotSeries, dest) -> None:
    def rows():
        for i, user in enumerate(series.users):
            for j, day in enumerate(series.days):
                yield (user, day.isoformat(), repr(float(series.values[i, j])), int(series.ranks[i, j]))

    if hasattr(dest, "write"):
        _write_rows(dest, rows())
    else:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            _write_rows(fh, rows())


def _write_rows(fh, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SNAPSHOT_HEADER)
    writer.writerows(rows)


def _user_key(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def read_snapshot_csv(source) -> SnapshotSeries:
    """Read a snapshot CSV; ranks are taken from the file and validated."""
    fh = source if hasattr(source, "read") else open(source, newline="", encoding="utf-8")
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SNAPSHOT_HEADER:
            raise SeriesError(f"snapshot header must be {','.join(SNAPSHOT_HEADER)}")
        cells = {}
        users, days = set(), set()
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise SeriesError(f"line {reader.line_num}: expected 4 fields")
            user, day = _user_key(row[0]), date.fromisoformat(row[1])
            cells[user, day] = (float(row[2]), int(row[3]))
            users.add(user)
            days.add(day)
    finally:
        if fh is not source:
            fh.close()
    users, days = sorted(users), sorted(days)
    if len(cells) != len(users) * len(days):
        raise SeriesError("snapshot file does not cover every user x day cell")
    values = np.zeros((len(users), len(days)))
    ranks = np.zeros((len(users), len(days)), dtype=np.int64)
    for i, u in enumerate(users):
        for j, d in enumerate(days):
            values[i, j], ranks[i, j] = cells[u, d]
    series = SnapshotSeries(tuple(users), tuple(days), values, ranks)
    series.check_valid()
    return series
