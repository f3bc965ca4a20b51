import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dibrm.model import InteractionEvent, ModelParams, StreakMode

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"
T0 = 1_527_811_200  # 2018-06-01T00:00:00Z


def brute_force(events, params):
    """Recompute every user's trajectory from scratch, without the recurrence.

    Trust is evaluated in closed form as sum_k I_k * beta ** (periods since k),
    and every delta / streak is re-derived from the raw timestamps of the
    prefix.  Returns {user: [(delta, streak, i_c, i_n, trust, historical), ...]}.
    """
    ta = round(params.ta_days * 86400)
    by_user = {}
    for e in events:
        by_user.setdefault(e.user_id, []).append(e)
    out = {}
    for user, evs in by_user.items():
        ts = np.array([e.timestamp for e in evs], dtype=np.int64)
        deltas = np.zeros(len(evs), dtype=np.int64)
        deltas[1:] = (ts[1:] - ts[:-1]) // ta
        streaks = []
        for k in range(len(evs)):
            if params.streak_mode == StreakMode.CUMULATIVE:
                streaks.append(k + 1)
            else:
                # length of the run of zero-gap steps ending at k
                run = 1
                while k - run + 1 > 0 and deltas[k - run + 1] == 0:
                    run += 1
                streaks.append(run)
        i_b = np.array([params.base_values[e.kind] for e in evs])
        a = np.array(streaks, dtype=float)
        i_c = i_b * params.alpha * (a / (a + 1))
        i_n = i_b + i_c
        elapsed = np.cumsum(deltas)
        rows = []
        hist = 0.0
        for n in range(len(evs)):
            t_n = float(np.sum(i_n[: n + 1] * np.power(params.beta, (elapsed[n] - elapsed[: n + 1]).astype(float))))
            hist += t_n
            rows.append((int(deltas[n]), streaks[n], float(i_c[n]), float(i_n[n]), t_n, hist))
        out[user] = rows
    return out


def exact_trajectory(events, alpha, beta, ta_seconds, base_values, mode="reset"):
    """Same quantities as :func:`brute_force` in exact rational arithmetic."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    state = {}
    out = {}
    for e in events:
        last, streak, trust, hist = state.get(e.user_id, (None, 0, Fraction(0), Fraction(0)))
        if last is None:
            delta, streak = 0, 1
        else:
            delta = (e.timestamp - last) // ta_seconds
            streak = streak + 1 if (mode == "cumulative" or delta == 0) else 1
        i_b = Fraction(base_values[e.kind])
        i_c = i_b * alpha * (1 - Fraction(1, streak + 1))
        trust = trust * beta**delta + i_b + i_c
        hist += trust
        state[e.user_id] = (e.timestamp, streak, trust, hist)
        out.setdefault(e.user_id, []).append((delta, streak, i_c, i_b + i_c, trust, hist))
    return out, state


def random_stream(rng: random.Random, n_events: int, n_users: int, kinds=("post", "comment"),
                  max_gap_days=4.0, start=T0):
    """Sorted random stream with bursts of ties, short gaps and long gaps."""
    t = start
    events = []
    for k in range(n_events):
        r = rng.random()
        if r < 0.1:
            gap = 0
        elif r < 0.6:
            gap = rng.randrange(1, 86_400)
        else:
            gap = rng.randrange(1, int(max_gap_days * 86_400) + 1)
        t += gap
        user = rng.randrange(1, n_users + 1)
        events.append(InteractionEvent(f"e{k:07d}", user, t, rng.choice(kinds), rng.randrange(-3, 10)))
    return events


def rel_close(a, b, rel=1e-9):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)


@pytest.fixture
def params():
    return ModelParams(alpha=1.0, beta=0.5, ta_days=1.0, base_values={"post": 4.0, "comment": 2.0})
