"""Reference reputation scorers used as comparison targets.

``karma_series`` is a vote-sum stand-in for Reddit karma (the real ranking
algorithm is not public).  ``points_series`` is a configurable per-kind
points model in the spirit of MathOverflow reputation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from .model import UnmappedEventKind
from .series import SeriesError, SnapshotSeries, day_ends
from .table import EventTable, as_table

KARMA_PARTS = ("total", "post", "comment")


@dataclass(frozen=True)
class ScoringRule:
    points_per_vote: Mapping[str, float] = field(
        default_factory=lambda: {"post": 5.0, "comment": 1.0}
    )
    points_per_event: Mapping[str, float] = field(
        default_factory=lambda: {"post": 0.0, "comment": 0.0}
    )

    def __post_init__(self):
        if not self.points_per_vote and not self.points_per_event:
            raise ValueError("scoring rule needs at least one mapped kind")
        for table in (self.points_per_vote, self.points_per_event):
            for kind, value in table.items():
                if not math.isfinite(value):
                    raise ValueError(f"non-finite points for kind {kind!r}")

    def points(self, kind: str, vote: int) -> float:
        if kind not in self.points_per_vote and kind not in self.points_per_event:
            raise UnmappedEventKind(kind)
        return self.points_per_event.get(kind, 0.0) + vote * self.points_per_vote.get(kind, 0.0)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScoringRule":
        return cls(
            {k: float(v) for k, v in data.get("points_per_vote", {}).items()},
            {k: float(v) for k, v in data.get("points_per_event", {}).items()},
        )

    @classmethod
    def from_json(cls, path) -> "ScoringRule":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _cumulative(table: EventTable, users, days, points) -> SnapshotSeries:
    """Cumulative per-day sums of ``points`` (one value per table row)."""
    users = sorted(users)
    if not users:
        raise SeriesError("empty user universe")
    ends = day_ends(days)
    daily = np.zeros((len(users), len(days)))
    if len(table) and len(days):
        row_of = {u: i for i, u in enumerate(users)}
        rows = np.array([row_of.get(u, -1) for u in table.user_id.tolist()], dtype=np.int64)
        cols = np.searchsorted(ends, table.timestamp, side="right")
        keep = (rows >= 0) & (cols < len(days))
        np.add.at(daily, (rows[keep], cols[keep]), np.asarray(points, dtype=float)[keep])
    return SnapshotSeries.from_values(users, days, np.cumsum(daily, axis=1))


def karma_series(
    events,
    users: Sequence,
    days: Sequence[date],
    part: str = "total",
) -> SnapshotSeries:
    """Cumulative vote-sum karma per user per day.

    ``part`` selects post karma, comment karma, or their sum.  Events of
    other kinds do not count.  Votes may be negative.
    """
    if part not in KARMA_PARTS:
        raise ValueError(f"karma part must be one of {KARMA_PARTS}, got {part!r}")
    table = as_table(events)
    counted = [k in (("post", "comment") if part == "total" else (part,)) for k in table.kinds]
    mask = np.array(counted, dtype=bool)[table.kind] if len(table) else np.zeros(0, dtype=bool)
    return _cumulative(table, users, days, np.where(mask, table.vote, 0))


def points_series(
    events,
    rule: ScoringRule,
    users: Sequence,
    days: Sequence[date],
) -> SnapshotSeries:
    table = as_table(events)
    per_event = np.zeros(len(table.kinds))
    per_vote = np.zeros(len(table.kinds))
    for code in np.unique(table.kind).tolist():
        kind = table.kinds[code]
        rule.points(kind, 0)  # raises on an unmapped kind
        per_event[code] = rule.points_per_event.get(kind, 0.0)
        per_vote[code] = rule.points_per_vote.get(kind, 0.0)
    points = per_event[table.kind] + table.vote * per_vote[table.kind]
    return _cumulative(table, users, days, points)
