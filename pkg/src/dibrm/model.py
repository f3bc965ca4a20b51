"""Interaction-frequency trust model.

Trust grows with every interaction and decays geometrically over idle
activity periods.  All timestamps are integer UTC epoch seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

SECONDS_PER_DAY = 86_400


class ModelError(ValueError):
    pass


class NonMonotonicTimestamps(ModelError):
    def __init__(self, t_now: int, t_prev: int):
        super().__init__(f"non-monotonic timestamps: {t_now} < {t_prev}")
        self.t_now = t_now
        self.t_prev = t_prev


class UnmappedEventKind(ModelError):
    def __init__(self, kind: str):
        super().__init__(f"unmapped event kind: {kind!r}")
        self.kind = kind


class StreakMode(str, Enum):
    RESET = "reset"
    CUMULATIVE = "cumulative"


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 1.0
    beta: float = 0.99
    ta_days: float = 1.0
    base_values: Mapping[str, float] = field(
        default_factory=lambda: {"post": 4.0, "comment": 4.0}
    )
    streak_mode: StreakMode = StreakMode.RESET

    def __post_init__(self):
        object.__setattr__(self, "streak_mode", StreakMode(self.streak_mode))
        object.__setattr__(self, "base_values", dict(sorted(self.base_values.items())))
        if not (0.0 <= self.beta <= 1.0):
            raise ModelError(f"beta must be in [0, 1], got {self.beta}")
        if not (self.alpha >= 0.0) or not math.isfinite(self.alpha):
            raise ModelError(f"alpha must be >= 0, got {self.alpha}")
        if not (self.ta_days > 0.0) or not math.isfinite(self.ta_days):
            raise ModelError(f"ta_days must be > 0, got {self.ta_days}")
        if self.ta_seconds < 1:
            raise ModelError(f"ta_days={self.ta_days} is shorter than one second")
        if not self.base_values:
            raise ModelError("base_values must not be empty")
        for kind, value in self.base_values.items():
            if not (value > 0.0) or not math.isfinite(value):
                raise ModelError(f"base value for {kind!r} must be > 0, got {value}")

    @property
    def ta_seconds(self) -> int:
        # whole-second period so that period counting is exact integer division
        return round(self.ta_days * SECONDS_PER_DAY)

    def base_value(self, kind: str) -> float:
        try:
            return self.base_values[kind]
        except KeyError:
            raise UnmappedEventKind(kind) from None


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    event_id: str
    user_id: int
    timestamp: int
    kind: str
    vote: int = 0

    @property
    def sort_key(self):
        return (self.timestamp, self.event_id)


@dataclass(frozen=True, slots=True)
class UserTrustState:
    user_id: int
    last_timestamp: int | None = None
    activity_streak: int = 0
    trust: float = 0.0
    historical: float = 0.0
    event_count: int = 0


def periods_elapsed(t_now: int, t_prev: int, ta_seconds: int) -> int:
    """Number of whole activity periods between two instants."""
    if t_now < t_prev:
        raise NonMonotonicTimestamps(t_now, t_prev)
    if ta_seconds <= 0:
        raise ModelError(f"activity period must be positive, got {ta_seconds}")
    return (t_now - t_prev) // ta_seconds


def cumulative_value(i_b: float, alpha: float, a_n: int) -> float:
    return i_b * alpha * (1.0 - 1.0 / (a_n + 1))


def update_trust(prev_trust: float, delta: int, beta: float, i_n: float) -> float:
    return prev_trust * beta**delta + i_n


def update_streak(a_prev: int, delta: int, mode: StreakMode | str) -> int:
    if StreakMode(mode) is StreakMode.CUMULATIVE or delta == 0:
        return a_prev + 1
    return 1


def process_event(
    state: UserTrustState, event: InteractionEvent, params: ModelParams
) -> UserTrustState:
    """Return the user's state after one more interaction."""
    i_b = params.base_value(event.kind)
    if state.last_timestamp is None:
        delta = 0
        streak = 1
    else:
        delta = periods_elapsed(event.timestamp, state.last_timestamp, params.ta_seconds)
        streak = update_streak(state.activity_streak, delta, params.streak_mode)
    i_n = i_b + cumulative_value(i_b, params.alpha, streak)
    trust = update_trust(state.trust, delta, params.beta, i_n)
    return replace(
        state,
        last_timestamp=event.timestamp,
        activity_streak=streak,
        trust=trust,
        historical=state.historical + trust,
        event_count=state.event_count + 1,
    )


def decayed_trust_at(state: UserTrustState, t: int, params: ModelParams) -> float:
    """Trust as seen at instant ``t``, after decay over the idle periods."""
    if state.last_timestamp is None:
        return 0.0
    delta = periods_elapsed(t, state.last_timestamp, params.ta_seconds)
    return state.trust * params.beta**delta


def fold_events(
    events: Iterable[InteractionEvent], params: ModelParams
) -> dict[int, UserTrustState]:
    """Run every event through :func:`process_event`, one state per user."""
    states: dict[int, UserTrustState] = {}
    for event in events:
        state = states.get(event.user_id)
        if state is None:
            state = UserTrustState(event.user_id)
        states[event.user_id] = process_event(state, event, params)
    return states


def trust_trajectory(
    events: Iterable[InteractionEvent], params: ModelParams
) -> dict[int, list[UserTrustState]]:
    """Every intermediate state per user, in event order."""
    out: dict[int, list[UserTrustState]] = {}
    for event in events:
        history = out.setdefault(event.user_id, [])
        state = history[-1] if history else UserTrustState(event.user_id)
        history.append(process_event(state, event, params))
    return out
