"""Interaction-frequency reputation scoring and rank-agreement evaluation."""

from .compare import AgreementReport, dibrm_snapshot_pair, dibrm_snapshots, mu_double_sum, mu_metric
from .ingest import CommentRecord, PostRecord, load_events, load_table, merge_streams, parse_comments, parse_posts
from .model import (
    InteractionEvent,
    ModelParams,
    StreakMode,
    UserTrustState,
    cumulative_value,
    decayed_trust_at,
    fold_events,
    periods_elapsed,
    process_event,
    update_streak,
    update_trust,
)
from .reference import ScoringRule, karma_series, points_series
from .series import SnapshotSeries, rank_places
from .sweep import SweepSpec, run_sweep, standard_grid_specs
from .synth import ProfileSpec, SplitMix64, generate, mixed_population
from .table import EventTable, final_states

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "CommentRecord",
    "EventTable",
    "InteractionEvent",
    "ModelParams",
    "PostRecord",
    "ProfileSpec",
    "ScoringRule",
    "SnapshotSeries",
    "SplitMix64",
    "StreakMode",
    "SweepSpec",
    "UserTrustState",
    "cumulative_value",
    "decayed_trust_at",
    "dibrm_snapshot_pair",
    "dibrm_snapshots",
    "final_states",
    "fold_events",
    "generate",
    "karma_series",
    "load_events",
    "load_table",
    "merge_streams",
    "mixed_population",
    "mu_double_sum",
    "mu_metric",
    "parse_comments",
    "parse_posts",
    "periods_elapsed",
    "points_series",
    "process_event",
    "rank_places",
    "run_sweep",
    "standard_grid_specs",
    "update_streak",
    "update_trust",
]
