"""CSV ingestion of post and comment tuples.

Expected headers (case-insensitive)::

    PostId,UserId,CreationDate,Vote
    CommentId,UserId,CreationDate,PostId,Vote,ParentId

Dates are ISO-8601; a missing zone means UTC.  Fractional seconds are
truncated.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Union

import numpy as np

from .model import InteractionEvent
from .table import EventTable

POST_HEADER = ("PostId", "UserId", "CreationDate", "Vote")
COMMENT_HEADER = ("CommentId", "UserId", "CreationDate", "PostId", "Vote", "ParentId")

Source = Union[str, os.PathLike, IO[str]]


class IngestError(ValueError):
    pass


class SchemaError(IngestError):
    pass


@dataclass(frozen=True)
class RowError:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


class RowErrors(IngestError):
    def __init__(self, source: str, errors: list[RowError]):
        self.source = source
        self.errors = errors
        shown = "; ".join(str(e) for e in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"{source}: {len(errors)} bad row(s): {shown}{more}")


@dataclass(frozen=True, slots=True)
class PostRecord:
    post_id: int
    user_id: int
    creation_date: int
    vote: int


@dataclass(frozen=True, slots=True)
class CommentRecord:
    comment_id: int
    user_id: int
    creation_date: int
    post_id: int
    vote: int
    parent_id: int


_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_timestamp(text: str) -> int:
    """ISO-8601 string to integer UTC epoch seconds."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int((dt - _EPOCH).total_seconds() // 1)


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _open(source: Source):
    if hasattr(source, "read"):
        return source, False, getattr(source, "name", "<stream>")
    return open(source, newline="", encoding="utf-8"), True, str(source)


def _read(source: Source, header: tuple[str, ...], build, id_attr: str, skip_bad_rows: bool):
    fh, owned, name = _open(source)
    try:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            # completely empty file: no header, no rows
            return []
        got = tuple(c.strip().lower() for c in first)
        want = tuple(c.lower() for c in header)
        if got != want:
            missing = [c for c, lc in zip(header, want) if lc not in got]
            detail = f"missing column(s) {missing}" if missing else f"expected {list(header)}"
            raise SchemaError(f"{name}: header {list(first)} does not match schema; {detail}")

        width = len(header)
        out = []
        seen_ids = set()
        errors: list[RowError] = []
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != width:
                errors.append(RowError(line, f"schema mismatch: expected {width} fields, got {len(row)}"))
                continue
            try:
                record = build(row)
            except ValueError as exc:
                errors.append(RowError(line, str(exc)))
                continue
            key = getattr(record, id_attr)
            if key in seen_ids:
                errors.append(RowError(line, f"duplicate {header[0]} {key}"))
                continue
            seen_ids.add(key)
            out.append(record)
        if errors and not skip_bad_rows:
            raise RowErrors(name, errors)
        return out
    finally:
        if owned:
            fh.close()


def _int(value: str, column: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{column}: not an integer: {value!r}") from None


def _date(value: str) -> int:
    try:
        return parse_timestamp(value)
    except ValueError:
        raise ValueError(f"CreationDate: not an ISO-8601 date: {value!r}") from None


def _post(row):
    return PostRecord(
        _int(row[0], "PostId"), _int(row[1], "UserId"), _date(row[2]), _int(row[3], "Vote")
    )


def _comment(row):
    return CommentRecord(
        _int(row[0], "CommentId"),
        _int(row[1], "UserId"),
        _date(row[2]),
        _int(row[3], "PostId"),
        _int(row[4], "Vote"),
        _int(row[5], "ParentId"),
    )


def parse_posts(source: Source, skip_bad_rows: bool = False) -> list[PostRecord]:
    """Parse a posts CSV.

    Bad rows are collected and raised together as :class:`RowErrors` with
    their 1-based file line numbers, unless ``skip_bad_rows`` is set, in
    which case they are dropped.
    """
    return _read(source, POST_HEADER, _post, "post_id", skip_bad_rows)


def parse_comments(source: Source, skip_bad_rows: bool = False) -> list[CommentRecord]:
    return _read(source, COMMENT_HEADER, _comment, "comment_id", skip_bad_rows)


def write_posts(records: Iterable[PostRecord], dest: Source) -> None:
    _write(dest, POST_HEADER, (
        (r.post_id, r.user_id, format_timestamp(r.creation_date), r.vote) for r in records
    ))


def write_comments(records: Iterable[CommentRecord], dest: Source) -> None:
    _write(dest, COMMENT_HEADER, (
        (r.comment_id, r.user_id, format_timestamp(r.creation_date), r.post_id, r.vote, r.parent_id)
        for r in records
    ))


def _write(dest: Source, header, rows):
    if hasattr(dest, "write"):
        fh, owned = dest, False
    else:
        fh, owned = open(dest, "w", newline="", encoding="utf-8"), True
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if owned:
            fh.close()


def post_event_id(post_id: int) -> str:
    return f"p{post_id}"


def comment_event_id(comment_id: int) -> str:
    return f"c{comment_id}"


def merge_streams(
    posts: Iterable[PostRecord], comments: Iterable[CommentRecord]
) -> list[InteractionEvent]:
    """One chronologically sorted event stream, ties broken by event id."""
    events = [
        InteractionEvent(post_event_id(p.post_id), p.user_id, p.creation_date, "post", p.vote)
        for p in posts
    ]
    events.extend(
        InteractionEvent(comment_event_id(c.comment_id), c.user_id, c.creation_date, "comment", c.vote)
        for c in comments
    )
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    return events


def load_events(
    posts: Source | None = None,
    comments: Source | None = None,
    skip_bad_rows: bool = False,
) -> list[InteractionEvent]:
    post_records = parse_posts(posts, skip_bad_rows) if posts is not None else []
    comment_records = parse_comments(comments, skip_bad_rows) if comments is not None else []
    return merge_streams(post_records, comment_records)


def read_text(text: str, kind: str, skip_bad_rows: bool = False):
    """Parse CSV content held in a string; ``kind`` is "posts" or "comments"."""
    parser = {"posts": parse_posts, "comments": parse_comments}[kind]
    return parser(io.StringIO(text), skip_bad_rows)


def _fast_columns(path, header, kind, id_column, prefix):
    """Vectorised parse; raises on anything the strict parser would reject."""
    import pandas as pd

    with open(path, newline="", encoding="utf-8") as fh:
        first = next(csv.reader(fh))
    if tuple(c.strip().lower() for c in first) != tuple(c.lower() for c in header):
        raise ValueError("header mismatch")
    dtypes = {c: ("str" if c == "CreationDate" else "int64") for c in header}
    frame = pd.read_csv(
        path, skiprows=1, header=None, names=list(header), dtype=dtypes,
        keep_default_na=False, na_filter=False, encoding="utf-8",
    )
    ids = frame[id_column].to_numpy()
    if len(ids) and len(np.unique(ids)) != len(ids):
        raise ValueError("duplicate ids")
    dates = pd.to_datetime(frame["CreationDate"].str.strip(), utc=True, format="ISO8601")
    ts = pd.DatetimeIndex(dates).asi8 // 1_000_000_000
    event_ids = np.char.add(prefix, ids.astype(str))
    return (kind, ts, frame["UserId"].to_numpy(), frame["Vote"].to_numpy(), event_ids)


def _strict_columns(records, kind, id_attr, prefix):
    return (
        kind,
        np.array([r.creation_date for r in records], dtype=np.int64),
        np.array([r.user_id for r in records], dtype=np.int64),
        np.array([r.vote for r in records], dtype=np.int64),
        np.array([f"{prefix}{getattr(r, id_attr)}" for r in records], dtype=object),
    )


def load_table(
    posts: Source | None = None,
    comments: Source | None = None,
    skip_bad_rows: bool = False,
) -> EventTable:
    """Columnar equivalent of :func:`load_events`, fast for large files.

    Files are first read with pandas; any irregularity sends the file
    through the strict row parser, which produces the line-numbered errors
    (or drops the bad rows with ``skip_bad_rows``).
    """
    specs = [
        (posts, POST_HEADER, "post", "PostId", "p", parse_posts, "post_id"),
        (comments, COMMENT_HEADER, "comment", "CommentId", "c", parse_comments, "comment_id"),
    ]
    parts = []
    for source, header, kind, id_column, prefix, strict, id_attr in specs:
        if source is None:
            continue
        part = None
        if not hasattr(source, "read") and os.path.getsize(source) > 0:
            try:
                part = _fast_columns(source, header, kind, id_column, prefix)
            except (ValueError, TypeError, OverflowError, StopIteration):
                part = None
        if part is None:
            part = _strict_columns(strict(source, skip_bad_rows), kind, id_attr, prefix)
        parts.append(part)
    return EventTable.concat(parts)
