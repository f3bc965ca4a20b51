"""Columnar event storage and the vectorised scoring kernels.

An :class:`EventTable` holds a sorted stream as parallel numpy arrays.  It
is what the snapshot, reference and sweep code actually run on; lists of
:class:`~dibrm.model.InteractionEvent` are converted on the way in.

The trust recurrence is evaluated with the same floating-point operations,
in the same order, as :func:`dibrm.model.process_event`, so both paths
agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import InteractionEvent, ModelParams, StreakMode


@dataclass(frozen=True, eq=False)
class EventTable:
    timestamp: np.ndarray  # int64 epoch seconds, sorted with event_id as tie-break
    user_id: np.ndarray
    kind: np.ndarray  # int codes into ``kinds``
    vote: np.ndarray
    event_id: np.ndarray  # str ids
    kinds: tuple[str, ...]

    def __len__(self):
        return len(self.timestamp)

    @classmethod
    def from_events(cls, events: Sequence[InteractionEvent]) -> "EventTable":
        kinds = tuple(sorted({e.kind for e in events}))
        code = {k: i for i, k in enumerate(kinds)}
        users = [e.user_id for e in events]
        user_arr = np.array(users, dtype=np.int64) if all(type(u) is int for u in users) else np.array(users, dtype=object)
        return cls(
            np.array([e.timestamp for e in events], dtype=np.int64),
            user_arr,
            np.array([code[e.kind] for e in events], dtype=np.int64),
            np.array([e.vote for e in events], dtype=np.int64),
            np.array([e.event_id for e in events], dtype=object),
            kinds,
        ).sorted()

    @classmethod
    def concat(cls, parts: Sequence[tuple[str, np.ndarray, np.ndarray, np.ndarray, np.ndarray]]):
        """Build from ``(kind, timestamp, user_id, vote, event_id)`` columns."""
        kinds = tuple(sorted({p[0] for p in parts}))
        code = {k: i for i, k in enumerate(kinds)}
        if not parts:
            empty = np.zeros(0, dtype=np.int64)
            return cls(empty, empty, empty, empty, np.zeros(0, dtype=object), ())
        table = cls(
            np.concatenate([p[1] for p in parts]).astype(np.int64),
            np.concatenate([p[2] for p in parts]),
            np.concatenate([np.full(len(p[1]), code[p[0]], dtype=np.int64) for p in parts]),
            np.concatenate([p[3] for p in parts]).astype(np.int64),
            np.concatenate([np.asarray(p[4]).astype(str) for p in parts]),
            kinds,
        )
        return table.sorted()

    def sorted(self) -> "EventTable":
        order = sort_order(self.timestamp, self.event_id)
        return EventTable(
            self.timestamp[order], self.user_id[order], self.kind[order],
            self.vote[order], self.event_id[order], self.kinds,
        )

    def to_events(self) -> list[InteractionEvent]:
        kinds = self.kinds
        return [
            InteractionEvent(eid, uid, ts, kinds[k], v)
            for eid, uid, ts, k, v in zip(
                self.event_id.tolist(), self.user_id.tolist(), self.timestamp.tolist(),
                self.kind.tolist(), self.vote.tolist(),
            )
        ]

    def users(self) -> list:
        return sorted(set(self.user_id.tolist()))


def as_table(events) -> EventTable:
    return events if isinstance(events, EventTable) else EventTable.from_events(events)


def sort_order(timestamp: np.ndarray, event_id: np.ndarray) -> np.ndarray:
    """Permutation ordering rows by (timestamp, event_id).

    Integer sort first; only rows sharing a timestamp with a neighbour are
    then re-sorted by their string ids.
    """
    order = np.argsort(timestamp, kind="stable")
    ts = timestamp[order]
    if len(ts) < 2:
        return order
    same = ts[1:] == ts[:-1]
    tied = np.zeros(len(ts), dtype=bool)
    tied[1:] |= same
    tied[:-1] |= same
    pos = np.flatnonzero(tied)
    if len(pos) == 0:
        return order
    rows = order[pos]
    id_rank = np.unique(np.asarray(event_id[rows]).astype(str), return_inverse=True)[1].reshape(-1)
    order[pos] = rows[np.lexsort((id_rank, ts[pos]))]
    return order


@dataclass(frozen=True, eq=False)
class TrustColumns:
    """Per-event model quantities, rows grouped by user in time order."""

    order: np.ndarray  # row indices into the table
    user_id: np.ndarray
    timestamp: np.ndarray
    delta: np.ndarray
    streak: np.ndarray
    cumulative: np.ndarray
    interaction: np.ndarray
    trust: np.ndarray
    historical: np.ndarray
    first: np.ndarray  # True on each user's first event


def trust_columns(table: EventTable, params: ModelParams) -> TrustColumns:
    """Delta, streak, cumulative part, interaction value, trust and historical per event."""
    base = np.zeros(len(table.kinds))
    for code in np.unique(table.kind).tolist():
        base[code] = params.base_value(table.kinds[code])
    order = np.argsort(_user_codes(table.user_id), kind="stable")
    user = table.user_id[order]
    ts = table.timestamp[order]
    n = len(ts)
    first = np.ones(n, dtype=bool)
    if n:
        first[1:] = user[1:] != user[:-1]
    delta = np.zeros(n, dtype=np.int64)
    if n > 1:
        delta[1:] = (ts[1:] - ts[:-1]) // params.ta_seconds
    delta[first] = 0

    starts = first if StreakMode(params.streak_mode) is StreakMode.CUMULATIVE else first | (delta > 0)
    idx = np.arange(n)
    last_start = np.maximum.accumulate(np.where(starts, idx, 0)) if n else idx
    streak = idx - last_start + 1

    i_b = base[table.kind[order]]
    cumulative = i_b * params.alpha * (1.0 - 1.0 / (streak + 1))
    interaction = i_b + cumulative

    beta = params.beta
    factors = _powers(beta, delta)
    trust = np.empty(n)
    historical = np.empty(n)
    t = h = 0.0
    for k, (is_first, f, i_n) in enumerate(zip(first.tolist(), factors.tolist(), interaction.tolist())):
        if is_first:
            t = h = 0.0
        t = t * f + i_n
        h = h + t
        trust[k] = t
        historical[k] = h
    return TrustColumns(order, user, ts, delta, streak, cumulative, interaction, trust, historical, first)


def _powers(beta: float, exponents: np.ndarray) -> np.ndarray:
    """``beta ** e`` elementwise, evaluated with Python's float power."""
    uniq, inverse = np.unique(exponents, return_inverse=True)
    return np.array([beta ** int(e) for e in uniq.tolist()], dtype=float)[inverse.reshape(-1)]


def _user_codes(user_id: np.ndarray) -> np.ndarray:
    if user_id.dtype != object:
        return user_id
    return np.unique(user_id, return_inverse=True)[1].reshape(-1)


def _member(user_id: np.ndarray, users: Sequence) -> np.ndarray:
    if user_id.dtype != object and all(isinstance(u, (int, np.integer)) for u in users):
        return np.isin(user_id, np.asarray(users, dtype=user_id.dtype))
    wanted = set(users)
    return np.fromiter((u in wanted for u in user_id.tolist()), dtype=bool, count=len(user_id))


def snapshot_matrices(
    table: EventTable,
    params: ModelParams,
    users: Sequence,
    ends: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Reputation (decayed to each day end) and historical matrices, users x days.

    ``users`` must be sorted; events of users outside it are ignored, as are
    events at or after the last day end.
    """
    n_users, n_days = len(users), len(ends)
    reputation = np.zeros((n_users, n_days))
    historical = np.zeros((n_users, n_days))
    if n_users == 0 or n_days == 0 or len(table) == 0:
        return reputation, historical

    keep = _member(table.user_id, users) & (table.timestamp < ends[-1])
    sub = EventTable(
        table.timestamp[keep], table.user_id[keep], table.kind[keep],
        table.vote[keep], table.event_id[keep], table.kinds,
    )
    cols = trust_columns(sub, params)
    if len(cols.timestamp) == 0:
        return reputation, historical

    row_of = {u: i for i, u in enumerate(users)}
    rows = np.array([row_of[u] for u in cols.user_id.tolist()], dtype=np.int64)
    day = np.searchsorted(ends, cols.timestamp, side="right")

    # last event of each (user, day) cell, then carried forward across days
    cell = rows * n_days + day
    last_in_cell = np.ones(len(cell), dtype=bool)
    last_in_cell[:-1] = cell[1:] != cell[:-1]
    grid = np.full(n_users * n_days, -1, dtype=np.int64)
    grid[cell[last_in_cell]] = np.flatnonzero(last_in_cell)
    grid = grid.reshape(n_users, n_days)
    grid = np.maximum.accumulate(grid, axis=1)

    has = grid >= 0
    src = grid[has]
    elapsed = (np.broadcast_to(ends, grid.shape)[has] - cols.timestamp[src]) // params.ta_seconds
    reputation[has] = cols.trust[src] * _powers(params.beta, elapsed)
    historical[has] = cols.historical[src]
    return reputation, historical


def final_states(table: EventTable, params: ModelParams) -> dict:
    """Per-user end-of-stream state as plain tuples
    ``(last_timestamp, streak, trust, historical, event_count)``."""
    cols = trust_columns(table, params)
    n = len(cols.timestamp)
    if n == 0:
        return {}
    last = np.ones(n, dtype=bool)
    last[:-1] = cols.first[1:]
    counts = np.diff(np.r_[np.flatnonzero(cols.first), n])
    ends = np.flatnonzero(last)
    return {
        user: (ts, streak, trust, hist, count)
        for user, ts, streak, trust, hist, count in zip(
            cols.user_id[ends].tolist(), cols.timestamp[ends].tolist(), cols.streak[ends].tolist(),
            cols.trust[ends].tolist(), cols.historical[ends].tolist(), counts.tolist(),
        )
    }
