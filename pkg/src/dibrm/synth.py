"""Seeded synthetic interaction streams.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014), a counter-based
generator that is trivial to port: output k is ``mix(seed + k * GOLDEN)``.
Uniform doubles take the top 53 bits.  Every user's draws come from their
own profile seed, so streams reproduce exactly across implementations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from .ingest import (
    CommentRecord,
    PostRecord,
    comment_event_id,
    post_event_id,
    write_comments,
    write_posts,
)
from .model import SECONDS_PER_DAY, InteractionEvent

PRNG_NAME = "splitmix64"
PROFILES = ("steady", "bursty", "churned")

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_START = int(datetime(2018, 1, 1, tzinfo=timezone.utc).timestamp())
VOTE_RANGE = (-2, 10)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    @staticmethod
    def mix(z: int) -> int:
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return self.mix(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniforms(self, n: int) -> np.ndarray:
        """The next ``n`` values of :meth:`random`, vectorised."""
        if n <= 0:
            return np.empty(0)
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + k * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GOLDEN) & _MASK
        return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class ProfileSpec:
    profile: str = "steady"
    rate: float = 1.0
    duration: float = 30.0
    kinds_mix: Mapping[str, float] = field(
        default_factory=lambda: {"post": 0.3, "comment": 0.7}
    )
    seed: int = 0
    burst_days: float = 3.0
    dormant_days: float = 10.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        if not self.duration >= 1:
            raise ValueError("duration must be >= 1 day")
        if not self.kinds_mix or any(p < 0 for p in self.kinds_mix.values()):
            raise ValueError("kinds_mix must be a non-empty map of probabilities")
        if abs(sum(self.kinds_mix.values()) - 1.0) > 1e-9:
            raise ValueError("kinds_mix probabilities must sum to 1")
        if self.burst_days <= 0 or self.dormant_days <= 0:
            raise ValueError("burst_days and dormant_days must be > 0")


def _poisson_offsets(rng: SplitMix64, rate: float, start: float, stop: float) -> list[float]:
    out = []
    t = start
    while True:
        t += -math.log(1.0 - rng.random()) / rate
        if t >= stop:
            return out
        out.append(t)


def _offsets(spec: ProfileSpec, rng: SplitMix64) -> list[float]:
    """Event times in days from the stream start."""
    if spec.profile == "steady":
        n = max(1, round(spec.rate * spec.duration))
        gap = spec.duration / n
        jitter = rng.uniforms(n)
        return [(k + 0.5 + 0.2 * (jitter[k] - 0.5)) * gap for k in range(n)]
    if spec.profile == "churned":
        return _poisson_offsets(rng, spec.rate, 0.0, spec.duration / 3.0)
    cycle = spec.burst_days + spec.dormant_days
    active_rate = spec.rate * cycle / spec.burst_days
    out: list[float] = []
    start = 0.0
    while start < spec.duration:
        stop = min(start + spec.burst_days, spec.duration)
        out.extend(_poisson_offsets(rng, active_rate, start, stop))
        start += cycle
    return out


def generate_user(user_id: int, spec: ProfileSpec, start: int = DEFAULT_START):
    """(timestamp, kind, vote) triples for one user, in time order."""
    rng = SplitMix64(spec.seed)
    offsets = _offsets(spec, rng)
    kinds = sorted(spec.kinds_mix)
    cdf = np.cumsum([spec.kinds_mix[k] for k in kinds])
    lo, hi = VOTE_RANGE
    draws = rng.uniforms(2 * len(offsets))
    out = []
    for n, offset in enumerate(offsets):
        u_kind, u_vote = draws[2 * n], draws[2 * n + 1]
        kind = kinds[min(int(np.searchsorted(cdf, u_kind, side="right")), len(kinds) - 1)]
        vote = lo + int(u_vote * (hi - lo + 1))
        out.append((start + int(offset * SECONDS_PER_DAY), kind, vote))
    return out


def generate(
    users: Sequence[tuple[int, ProfileSpec]], start: int = DEFAULT_START
) -> list[InteractionEvent]:
    """Merged, sorted event stream for every (user_id, profile) pair.

    Post and comment ids are numbered 1.. in global (timestamp, user_id)
    order, so the stream survives a round trip through the CSV formats.
    """
    raw = []
    for user_id, spec in users:
        for seq, (ts, kind, vote) in enumerate(generate_user(user_id, spec, start)):
            raw.append((ts, user_id, seq, kind, vote))
    raw.sort()
    counters: dict[str, int] = {}
    events = []
    for ts, user_id, _, kind, vote in raw:
        counters[kind] = counters.get(kind, 0) + 1
        if kind == "post":
            event_id = post_event_id(counters[kind])
        elif kind == "comment":
            event_id = comment_event_id(counters[kind])
        else:
            event_id = f"{kind}{counters[kind]}"
        events.append(InteractionEvent(event_id, user_id, ts, kind, vote))
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    return events


def mixed_population(
    n_users: int,
    seed: int,
    rate: float = 1.0,
    duration: float = 30.0,
    profile: str = "mixed",
    kinds_mix: Mapping[str, float] | None = None,
) -> list[tuple[int, ProfileSpec]]:
    """Users 1..n with per-user seeds derived from ``seed``.

    ``profile="mixed"`` cycles steady, bursty, churned.
    """
    seeder = SplitMix64(seed)
    mix = dict(kinds_mix) if kinds_mix else {"post": 0.3, "comment": 0.7}
    out = []
    for k in range(n_users):
        name = PROFILES[k % len(PROFILES)] if profile == "mixed" else profile
        out.append((k + 1, ProfileSpec(name, rate, duration, mix, seeder.next_u64())))
    return out


def to_records(events: Sequence[InteractionEvent]):
    """Split a generated stream into post and comment records.

    A comment points at the latest post created before it (0 if none).
    """
    posts, comments = [], []
    last_post = 0
    for e in events:
        if e.kind == "post":
            post_id = int(e.event_id[1:])
            posts.append(PostRecord(post_id, e.user_id, e.timestamp, e.vote))
            last_post = post_id
        elif e.kind == "comment":
            comments.append(
                CommentRecord(int(e.event_id[1:]), e.user_id, e.timestamp, last_post, e.vote, last_post)
            )
        else:
            raise ValueError(f"only post/comment kinds can be written as CSV, got {e.kind!r}")
    return posts, comments


def write_stream(events: Sequence[InteractionEvent], posts_path, comments_path) -> None:
    posts, comments = to_records(events)
    write_posts(posts, posts_path)
    write_comments(comments, comments_path)


def write_metadata(path, seed: int, population: Sequence[tuple[int, ProfileSpec]]) -> None:
    meta = {
        "prng": PRNG_NAME,
        "seed": seed,
        "users": [
            {
                "user_id": uid,
                "profile": spec.profile,
                "rate": spec.rate,
                "duration": spec.duration,
                "kinds_mix": dict(sorted(spec.kinds_mix.items())),
                "seed": spec.seed,
            }
            for uid, spec in population
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
