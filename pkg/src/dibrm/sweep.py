"""Exhaustive parameter grids scored against a fixed reference ranking."""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .compare import WHICH, dibrm_snapshot_pair, mu_metric
from .model import InteractionEvent, ModelError, ModelParams, StreakMode
from .series import SnapshotSeries

AXES = ("alpha", "beta", "ta_days", "base_values", "streak_mode")
SWEEP_HEADER = ("alpha", "beta", "ta_days", "base_values", "streak_mode", "which", "mu", "sigma")


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    axes: Mapping[str, Sequence]
    fixed: ModelParams = field(default_factory=ModelParams)
    which: str = "both"

    def __post_init__(self):
        if not self.axes:
            raise SweepError("sweep needs at least one axis")
        if self.which not in WHICH + ("both",):
            raise SweepError(f"which must be reputation, historical or both, got {self.which!r}")
        for name, values in self.axes.items():
            if name not in AXES:
                raise SweepError(f"unknown sweep axis {name!r}; expected one of {AXES}")
            if len(values) == 0:
                raise SweepError(f"axis {name!r} has no values")
        # validate every axis value against the parameter domains up front
        for name, values in self.axes.items():
            for value in values:
                try:
                    replace(self.fixed, **{name: value})
                except (ModelError, ValueError) as exc:
                    raise SweepError(f"axis {name!r}: invalid value {value!r}: {exc}") from None

    def grid(self) -> list[ModelParams]:
        """Grid points in lexicographic order of the declared axes."""
        names = list(self.axes)
        return [
            replace(self.fixed, **dict(zip(names, combo)))
            for combo in itertools.product(*(self.axes[n] for n in names))
        ]

    @property
    def whiches(self) -> tuple[str, ...]:
        return WHICH if self.which == "both" else (self.which,)


@dataclass(frozen=True)
class SweepRow:
    params: ModelParams
    which: str
    mu: float
    sigma: float

    def as_csv_row(self):
        p = self.params
        return (
            repr(float(p.alpha)),
            repr(float(p.beta)),
            repr(float(p.ta_days)),
            format_base_values(p.base_values),
            StreakMode(p.streak_mode).value,
            self.which,
            repr(self.mu),
            repr(self.sigma),
        )


def format_base_values(base_values: Mapping[str, float]) -> str:
    return ";".join(f"{k}={float(v)!r}" for k, v in sorted(base_values.items()))


def parse_base_values(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, text.split(";")):
        kind, _, value = part.partition("=")
        out[kind] = float(value)
    return out


def _evaluate(job):
    params, events, reference, users, days, whiches = job
    pair = dibrm_snapshot_pair(events, params, users, days)
    return [
        SweepRow(params, which, report.mu, report.sigma)
        for which in whiches
        for report in [mu_metric(reference, pair[which], which=which)]
    ]


def run_sweep(
    events: Sequence[InteractionEvent],
    reference: SnapshotSeries,
    spec: SweepSpec,
    workers: int = 1,
) -> list[SweepRow]:
    """Score every grid point against the one reference series.

    Rows come back in grid order (then reputation before historical)
    whatever the worker count.
    """
    jobs = [
        (params, events, reference, reference.users, reference.days, spec.whiches)
        for params in spec.grid()
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, jobs))
    else:
        results = [_evaluate(job) for job in jobs]
    return [row for rows in results for row in rows]


def write_sweep_csv(rows: Sequence[SweepRow], dest) -> None:
    if hasattr(dest, "write"):
        _write(rows, dest)
    else:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            _write(rows, fh)


def _write(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(row.as_csv_row() for row in rows)


def standard_grid_specs(fixed: ModelParams | None = None) -> dict[str, SweepSpec]:
    """The four standard table layouts: axes and the metric they report."""
    fixed = fixed or ModelParams()
    return {
        "historical_by_ta_beta": SweepSpec({"ta_days": [2, 8], "beta": [0.90, 0.99]}, fixed, "historical"),
        "reputation_by_alpha": SweepSpec({"alpha": [1, 2, 4, 8]}, fixed, "reputation"),
        "reputation_by_ta": SweepSpec({"ta_days": [1, 2, 4, 8]}, fixed, "reputation"),
        "historical_by_ta": SweepSpec({"ta_days": [1, 2, 4, 8]}, fixed, "historical"),
    }


def table_view(rows: Sequence[SweepRow], spec: SweepSpec) -> tuple[list[str], list[list]]:
    """Numbered table whose columns are the swept axes then mu and sigma."""
    axes = list(spec.axes)
    columns = ["#"] + axes
    for which in spec.whiches:
        tag = "D" if which == "reputation" else "H"
        columns += [f"mu_{tag}", f"sigma_{tag}"]
    body = []
    per_point = len(spec.whiches)
    for k in range(0, len(rows), per_point):
        chunk = rows[k:k + per_point]
        p = chunk[0].params
        line = [k // per_point + 1] + [getattr(p, a) for a in axes]
        for row in chunk:
            line += [row.mu, row.sigma]
        body.append(line)
    return columns, body
