"""Command line entry point: ``dibrm {compute,compare,sweep,synth,plotdata}``.

Settings come from an optional JSON config (``--config``); any flag given
on the command line overrides the matching config key.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from . import synth
from .compare import WHICH, AgreementReport, dibrm_snapshot_pair, mu_metric
from .ingest import IngestError, RowErrors, load_table
from .model import ModelError, ModelParams, StreakMode
from .reference import ScoringRule, karma_series, points_series
from .series import (
    SeriesError,
    SnapshotSeries,
    day_of,
    day_range,
    read_snapshot_csv,
    write_snapshot_csv,
)
from .sweep import (
    AXES,
    SweepError,
    SweepSpec,
    format_base_values,
    parse_base_values,
    standard_grid_specs,
    run_sweep,
    write_sweep_csv,
)

log = logging.getLogger("dibrm")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2
REFERENCES = ("karma", "karma-post", "karma-comment", "points")
PLOT_HEADER = ("UserId", "Day", "Series", "Value")
LOCK_NAME = ".dibrm.lock"


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    posts: str | None = None
    comments: str | None = None
    params: ModelParams = field(default_factory=ModelParams)
    rule: ScoringRule = field(default_factory=ScoringRule)
    reference: str = "karma"
    first_day: date | None = None
    last_day: date | None = None
    users: list | None = None
    which: str = "both"
    out: Path = Path("out")
    skip_bad_rows: bool = False
    figures: bool = True
    extra: dict = field(default_factory=dict)


# -- config -------------------------------------------------------------------

def _parse_kv(items):
    out = {}
    for item in items or []:
        kind, sep, value = item.partition("=")
        if not sep or not kind:
            raise ValidationError(f"expected kind=value, got {item!r}")
        try:
            out[kind] = float(value)
        except ValueError:
            raise ValidationError(f"base value for {kind!r} is not a number: {value!r}") from None
    return out


def _date(text):
    try:
        return date.fromisoformat(str(text))
    except ValueError:
        raise ValidationError(f"not an ISO date (YYYY-MM-DD): {text!r}") from None


def _user_id(text):
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        return text


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")

    def pick(flag, key=None, default=None):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        return data.get(key or flag, default)

    base_values = dict(data.get("base_values") or ModelParams().base_values)
    base_values.update(_parse_kv(getattr(args, "base_value", None)))
    defaults = ModelParams()
    params = ModelParams(
        alpha=float(pick("alpha", default=defaults.alpha)),
        beta=float(pick("beta", default=defaults.beta)),
        ta_days=float(pick("ta_days", default=defaults.ta_days)),
        base_values=base_values,
        streak_mode=StreakMode(pick("streak_mode", default=defaults.streak_mode)),
    )
    rule = ScoringRule.from_dict(data["rule"]) if "rule" in data else ScoringRule()
    if getattr(args, "rule", None):
        rule = ScoringRule.from_json(args.rule)

    first = pick("from_day", "from")
    last = pick("to_day", "to")
    users = pick("users")
    if isinstance(users, str):
        users = [u for u in users.split(",") if u.strip()]
    which = pick("which", default="both")
    if which not in WHICH + ("both",):
        raise ValidationError(f"--which must be reputation, historical or both, got {which!r}")
    reference = pick("reference", default="karma")
    if reference not in REFERENCES:
        raise ValidationError(f"--reference must be one of {REFERENCES}, got {reference!r}")
    return RunConfig(
        posts=pick("posts"),
        comments=pick("comments"),
        params=params,
        rule=rule,
        reference=reference,
        first_day=_date(first) if first is not None else None,
        last_day=_date(last) if last is not None else None,
        users=[_user_id(u) for u in users] if users is not None else None,
        which=which,
        out=Path(pick("out", default="out")),
        skip_bad_rows=bool(pick("skip_bad_rows", default=False)),
        figures=not getattr(args, "no_figures", False) and bool(data.get("figures", True)),
        extra=data,
    )


# -- shared pipeline ------------------------------------------------------------

@contextlib.contextmanager
def output_lock(out: Path):
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OSError(f"output directory {out} is locked by another run ({lock})") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield out
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock.unlink()


def _events(cfg: RunConfig):
    if cfg.posts is None and cfg.comments is None:
        raise ValidationError("at least one of --posts / --comments is required")
    for path in (cfg.posts, cfg.comments):
        if path is not None and not Path(path).is_file():
            raise FileNotFoundError(f"input file not found: {path}")
    table = load_table(cfg.posts, cfg.comments, cfg.skip_bad_rows)
    log.info("loaded %d events", len(table))
    return table


def _universe(cfg: RunConfig, events):
    users = cfg.users if cfg.users is not None else events.users()
    if len(events) and (cfg.first_day is None or cfg.last_day is None):
        span = [day_of(int(events.timestamp[0])), day_of(int(events.timestamp[-1]))]
    else:
        span = []
    first = cfg.first_day or (span[0] if span else None)
    last = cfg.last_day or (span[-1] if span else None)
    if first is None or last is None:
        days = []
    else:
        try:
            days = day_range(first, last)
        except SeriesError as exc:
            raise ValidationError(str(exc)) from None
    return sorted(users), days


def reference_series(cfg: RunConfig, events, users, days) -> SnapshotSeries:
    if cfg.reference == "points":
        return points_series(events, cfg.rule, users, days)
    part = {"karma": "total", "karma-post": "post", "karma-comment": "comment"}[cfg.reference]
    return karma_series(events, users, days, part)


def _whiches(cfg):
    return WHICH if cfg.which == "both" else (cfg.which,)


def _write_empty_snapshot(path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("UserId,Day,Value,Rank\n")


# -- commands -----------------------------------------------------------------

def cmd_compute(args) -> int:
    cfg = load_config(args)
    events = _events(cfg)
    users, days = _universe(cfg, events)
    with output_lock(cfg.out) as out:
        names = {w: out / f"dibrm_{w}.csv" for w in WHICH}
        ref_path = out / "reference.csv"
        if not users or not days:
            # nothing to rank: header-only (vacuously all-zero) snapshots
            for path in list(names.values()) + [ref_path]:
                _write_empty_snapshot(path)
        else:
            pair = dibrm_snapshot_pair(events, cfg.params, users, days)
            for which, path in names.items():
                write_snapshot_csv(pair[which], path)
            write_snapshot_csv(reference_series(cfg, events, users, days), ref_path)
    log.info("wrote snapshots for %d users x %d days to %s", len(users), len(days), cfg.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args)
    if args.reference_snapshot:
        reference = read_snapshot_csv(args.reference_snapshot)
        if args.self_compare:
            candidates = {w: reference for w in _whiches(cfg)}
        elif args.candidate_snapshot:
            if cfg.which == "both":
                raise ValidationError("--candidate-snapshot needs --which reputation|historical")
            candidates = {cfg.which: read_snapshot_csv(args.candidate_snapshot)}
        else:
            raise ValidationError("--reference-snapshot needs --candidate-snapshot or --self-compare")
    else:
        events = _events(cfg)
        users, days = _universe(cfg, events)
        if not users or not days:
            raise ValidationError("nothing to compare: empty user universe or day range")
        reference = reference_series(cfg, events, users, days)
        if args.self_compare:
            candidates = {w: reference for w in _whiches(cfg)}
        else:
            pair = dibrm_snapshot_pair(events, cfg.params, users, days)
            candidates = {w: pair[w] for w in _whiches(cfg)}

    reports: list[AgreementReport] = [
        mu_metric(reference, cand, which=which, sigma_axis=args.sigma_axis)
        for which, cand in candidates.items()
    ]
    with output_lock(cfg.out) as out:
        for report in reports:
            report.write_json(out / f"agreement_{report.which}.json")
            print(f"{report.which}: mu={report.mu!r} sigma={report.sigma!r}")
    return EXIT_OK


def _axis_values(name, text):
    parts = [p for p in text.split(",") if p.strip()]
    if name == "streak_mode":
        return parts
    if name == "base_values":
        return [parse_base_values(p) for p in text.split("|")]
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"axis {name!r}: values must be numbers, got {text!r}") from None


def sweep_specs(args, cfg: RunConfig) -> dict[str, SweepSpec]:
    if args.standard_grids:
        return standard_grid_specs(cfg.params)
    axes = {}
    conf = cfg.extra.get("sweep", {})
    for name, values in conf.get("axes", {}).items():
        axes[name] = list(values)
    for item in args.axis or []:
        name, sep, values = item.partition("=")
        if not sep:
            raise ValidationError(f"--axis expects name=v1,v2,..., got {item!r}")
        if name not in AXES:
            raise ValidationError(f"unknown sweep axis {name!r}; expected one of {AXES}")
        axes[name] = _axis_values(name, values)
    which = args.which if args.which is not None else conf.get("which", cfg.which)
    return {"sweep": SweepSpec(axes, cfg.params, which)}


def _grid_label(params, axes):
    parts = []
    for a in axes:
        v = getattr(params, a)
        if a == "base_values":
            v = format_base_values(v)
        elif a == "streak_mode":
            v = StreakMode(v).value
        parts.append(f"{a}={v}")
    return ", ".join(parts)


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    specs = sweep_specs(args, cfg)
    events = _events(cfg)
    users, days = _universe(cfg, events)
    if not users or not days:
        raise ValidationError("nothing to sweep: empty user universe or day range")
    reference = reference_series(cfg, events, users, days)
    with output_lock(cfg.out) as out:
        for name, spec in specs.items():
            rows = run_sweep(events, reference, spec, workers=args.jobs)
            path = out / f"{name}.csv"
            write_sweep_csv(rows, path)
            print(f"{path}: {len(rows)} rows")
            if cfg.figures:
                from .plotting import sweep_figure

                labels = [_grid_label(p, spec.axes) for p in spec.grid()]
                mus = {w: [r.mu for r in rows if r.which == w] for w in spec.whiches}
                sigmas = {w: [r.sigma for r in rows if r.which == w] for w in spec.whiches}
                sweep_figure(labels, mus, sigmas, out / f"{name}.png")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg_out = Path(args.out or "out")
    seed = args.seed if args.seed is not None else 0
    population = synth.mixed_population(
        args.n_users, seed, rate=args.rate, duration=args.duration, profile=args.profile
    )
    start = args.start
    events = synth.generate(population, synth.DEFAULT_START if start is None else _start_ts(start))
    with output_lock(cfg_out) as out:
        synth.write_stream(events, out / "posts.csv", out / "comments.csv")
        synth.write_metadata(out / "synth_meta.json", seed, population)
    print(f"{len(events)} events for {args.n_users} users -> {cfg_out}")
    return EXIT_OK


def _start_ts(text):
    from .series import day_start

    return day_start(_date(text))


def cmd_plotdata(args) -> int:
    cfg = load_config(args)
    events = _events(cfg)
    users, days = _universe(cfg, events)
    selected = [_user_id(u) for u in args.user or []]
    unknown = [u for u in selected if u not in users]
    if unknown:
        raise ValidationError(f"unknown user(s) in filter: {unknown}")
    if not users or not days:
        raise ValidationError("no users or days to plot")
    pair = dibrm_snapshot_pair(events, cfg.params, users, days)
    reference = reference_series(cfg, events, users, days)
    series = {
        "dibrm": pair["reputation"],
        "dibrm_historical": pair["historical"],
        "reference": reference,
    }
    chosen = sorted(selected) if selected else users
    with output_lock(cfg.out) as out:
        with open(out / "plotdata.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(PLOT_HEADER)
            for user in chosen:
                rows = {name: s.row(user) for name, s in series.items()}
                for j, day in enumerate(days):
                    for name, row in rows.items():
                        writer.writerow((user, day.isoformat(), name, repr(float(row[j]))))
        if cfg.figures:
            from .plotting import user_figure

            fig_dir = out / "figures"
            fig_dir.mkdir(exist_ok=True)
            for user in chosen:
                user_figure(user, days, {n: s.row(user) for n, s in series.items()},
                            fig_dir / f"user_{user}.png")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON config; flags override its keys")
    p.add_argument("--posts", help="posts CSV: PostId,UserId,CreationDate,Vote")
    p.add_argument("--comments", help="comments CSV: CommentId,UserId,CreationDate,PostId,Vote,ParentId")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--ta-days", dest="ta_days", type=float)
    p.add_argument("--base-value", dest="base_value", action="append", metavar="KIND=VALUE")
    p.add_argument("--streak-mode", dest="streak_mode", choices=[m.value for m in StreakMode])
    p.add_argument("--from", dest="from_day", metavar="YYYY-MM-DD")
    p.add_argument("--to", dest="to_day", metavar="YYYY-MM-DD")
    p.add_argument("--users", help="comma-separated user universe (default: every author)")
    p.add_argument("--which", choices=list(WHICH) + ["both"])
    p.add_argument("--reference", choices=REFERENCES)
    p.add_argument("--rule", help="JSON scoring rule for --reference points")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--skip-bad-rows", dest="skip_bad_rows", action="store_true", default=None)
    p.add_argument("--no-figures", dest="no_figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dibrm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="write DIBRM and reference snapshot CSVs")
    _add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("compare", help="write agreement reports (mu, sigma)")
    _add_common(p)
    p.add_argument("--reference-snapshot")
    p.add_argument("--candidate-snapshot")
    p.add_argument("--self-compare", action="store_true")
    p.add_argument("--sigma-axis", choices=["user", "day"], default="user")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="score a parameter grid")
    _add_common(p)
    p.add_argument("--axis", action="append", metavar="NAME=V1,V2,...",
                   help="base_values points are separated by '|', e.g. post=4;comment=2|post=8")
    p.add_argument("--standard-grids", action="store_true",
                   help="the four standard t_a / beta / alpha tables")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate seeded synthetic posts/comments CSVs")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-users", dest="n_users", type=int, default=20)
    p.add_argument("--profile", choices=list(synth.PROFILES) + ["mixed"], default="mixed")
    p.add_argument("--rate", type=float, default=1.0, help="events per day")
    p.add_argument("--duration", type=float, default=30.0, help="days")
    p.add_argument("--start", metavar="YYYY-MM-DD")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("plotdata", help="per-user long-format series CSV and figures")
    _add_common(p)
    p.add_argument("--user", action="append", help="restrict to this user (repeatable)")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except RowErrors as exc:
        print(f"dibrm: error: {exc.source}: {len(exc.errors)} bad row(s)", file=sys.stderr)
        for err in exc.errors:
            print(f"  {exc.source}: {err}", file=sys.stderr)
        print("  (rerun with --skip-bad-rows to drop them)", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationError, IngestError, ModelError, SeriesError, SweepError, ValueError) as exc:
        print(f"dibrm: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"dibrm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
