import random
from datetime import date

import numpy as np
import pytest

from dibrm.model import InteractionEvent, UnmappedEventKind
from dibrm.reference import ScoringRule, karma_series, points_series
from dibrm.series import day_range, day_start

from conftest import T0, random_stream

DAYS = day_range(date(2018, 6, 1), date(2018, 6, 5))


def ev(eid, user, day, kind, vote, hour=12):
    return InteractionEvent(eid, user, day_start(day) + hour * 3600, kind, vote)


def test_silent_user_is_zero():
    events = [ev("p1", 1, date(2018, 6, 2), "post", 5)]
    series = karma_series(events, [1, 2], DAYS)
    assert np.all(series.row(2) == 0)


def test_post_and_comment_karma_add_up():
    events = [ev("p1", 1, date(2018, 6, 2), "post", 5), ev("c1", 1, date(2018, 6, 2), "comment", 3, hour=13)]
    series = karma_series(events, [1], DAYS)
    assert series.row(1).tolist() == [0, 8, 8, 8, 8]
    assert karma_series(events, [1], DAYS, "post").row(1).tolist() == [0, 5, 5, 5, 5]
    assert karma_series(events, [1], DAYS, "comment").row(1).tolist() == [0, 3, 3, 3, 3]


def test_negative_karma():
    events = [ev("p1", 1, date(2018, 6, 1), "post", -2)]
    assert karma_series(events, [1], DAYS).row(1)[0] == -2


def test_day_boundary_is_utc_midnight():
    events = [
        InteractionEvent("p1", 1, day_start(date(2018, 6, 2)) - 1, "post", 1),
        InteractionEvent("p2", 1, day_start(date(2018, 6, 2)), "post", 10),
    ]
    assert karma_series(events, [1], DAYS).row(1).tolist() == [1, 11, 11, 11, 11]


def test_events_before_range_count_from_day_one():
    events = [ev("p1", 1, date(2018, 5, 20), "post", 4), ev("p2", 1, date(2018, 7, 1), "post", 9)]
    assert karma_series(events, [1], DAYS).row(1).tolist() == [4] * 5


def test_points_all_zero_rule():
    rule = ScoringRule({"post": 0.0, "comment": 0.0}, {"post": 0.0, "comment": 0.0})
    events = random_stream(random.Random(1), 50, 3)
    days = day_range(date(2018, 6, 1), date(2018, 7, 1))
    assert np.all(points_series(events, rule, [1, 2, 3], days).values == 0)


def test_points_per_vote():
    rule = ScoringRule({"post": 5.0}, {"post": 0.0})
    events = [ev("p1", 1, date(2018, 6, 1), "post", 2)]
    assert points_series(events, rule, [1], DAYS).row(1)[0] == 10


def test_default_rule_empty_stream():
    assert np.all(points_series([], ScoringRule(), [1, 2], DAYS).values == 0)


def test_default_rule_values():
    rule = ScoringRule()
    assert rule.points("post", 3) == 15
    assert rule.points("comment", 3) == 3


def test_unmapped_kind():
    with pytest.raises(UnmappedEventKind):
        points_series([ev("x1", 1, date(2018, 6, 1), "edit", 1)], ScoringRule(), [1], DAYS)


def test_rule_from_dict():
    rule = ScoringRule.from_dict({"points_per_vote": {"answer": 10}, "points_per_event": {"edit": 2}})
    assert rule.points("answer", 2) == 20
    assert rule.points("edit", 7) == 2


def test_additivity_over_disjoint_users():
    rng = random.Random(9)
    a = random_stream(rng, 80, 3)
    b = [InteractionEvent("b" + e.event_id, e.user_id + 10, e.timestamp + 3600, e.kind, e.vote)
         for e in random_stream(rng, 80, 3)]
    both = sorted(a + b, key=lambda e: (e.timestamp, e.event_id))
    days = day_range(date(2018, 6, 1), date(2018, 8, 1))
    users_a, users_b = [1, 2, 3], [11, 12, 13]
    whole = points_series(both, ScoringRule(), users_a + users_b, days)
    part_a = points_series(a, ScoringRule(), users_a, days)
    part_b = points_series(b, ScoringRule(), users_b, days)
    assert np.array_equal(whole.values, np.vstack([part_a.values, part_b.values]))


def test_day_value_ignores_later_events():
    events = random_stream(random.Random(4), 120, 4)
    days = day_range(date(2018, 6, 1), date(2018, 7, 15))
    full = karma_series(events, [1, 2, 3, 4], days)
    for j in (0, 5, 20):
        cut = day_start(days[j]) + 86_400
        truncated = karma_series([e for e in events if e.timestamp < cut], [1, 2, 3, 4], days)
        assert np.array_equal(full.values[:, : j + 1], truncated.values[:, : j + 1])
    assert T0 == day_start(date(2018, 6, 1))
