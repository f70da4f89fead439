"""Command-line entry point: ``opdsim <command> ...``.

Exit codes: 0 success, 2 usage, 3 bad data or config, 4 infeasible
(unreachable target, conditioning failure), 5 internal invariant broken.
"""

import argparse
from dataclasses import replace
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ard import InvariantViolation, Unreachable, navigate
from .config import DEFAULTS_TEXT, ConfigError, load_config
from .experiment import ExperimentError, ReplayError, TreatmentCombo, read_records, replay, run_detailed
from .placement import WINDOW_CODES, PlacementSpec, make_window, sample_obstacles, write_obstacles
from .pointproc import STANDARD_PROCESSES, ConditioningError, sample_conditioned, write_pattern
from .scene import SceneError, load_scene
from . import stats

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 2, 3, 4, 5

ENV_SEED = "OPDSIM_SEED"
ENV_JOBS = "OPDSIM_JOBS"

CLUTTER_ALIASES = {"csr": "CSR", "ip": "IP", "matern": "M", "thomas": "T", "hardcore": "HC", "strauss": "S"}

log = logging.getLogger("opdsim")


class UsageError(Exception):
    pass


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _seed(arg):
    if arg is not None:
        return arg
    env = _env_int(ENV_SEED)
    return 0 if env is None else env


# --- commands -----------------------------------------------------------------

def cmd_sample_clutter(args):
    code = CLUTTER_ALIASES[args.type]
    seed = _seed(args.seed)
    pattern = sample_conditioned(STANDARD_PROCESSES[code], n=args.n, rng=np.random.default_rng(seed))
    comments = [f"clutter_type {code}", f"n {args.n}", f"seed {seed}"]
    if args.out:
        write_pattern(pattern, args.out, comments)
    else:
        print(f"{len(pattern)} points (type {code}, seed {seed})")
    return EXIT_OK


def cmd_place_obstacles(args):
    seed = _seed(args.seed)
    spec = PlacementSpec(make_window(args.window), args.n)
    pattern = sample_obstacles(spec, np.random.default_rng(seed))
    if args.out:
        write_obstacles(pattern, spec, args.out)
    else:
        for x, y in pattern.points.tolist():
            print(f"{x!r},{y!r}")
    return EXIT_OK


def cmd_navigate(args):
    scene = load_scene(args.scene)
    result = navigate(scene, penalty_rule=args.penalty_rule)
    n_clutter, n_obstacle = scene.counts()
    print(f"length={result.total_length:.2f} disamb={result.n_disambiguations} "
          f"(disks: {n_clutter} clutter, {n_obstacle} obstacle)")
    if args.trace:
        text = "\n".join(result.trace_lines()) + "\n"
        if args.trace == "-":
            sys.stdout.write(text)
        else:
            Path(args.trace).write_text(text, encoding="utf-8")
    if args.out:
        Path(args.out).write_text("total_length,n_disambiguations,n_replans\n" + result.summary() + "\n",
                                  encoding="utf-8")
    return EXIT_OK


def cmd_run_experiment(args):
    if args.print_defaults:
        sys.stdout.write(DEFAULTS_TEXT)
        return EXIT_OK
    if not args.config:
        raise UsageError("run-experiment needs --config (or --print-defaults)")
    rc = load_config(args.config)
    exp = rc.experiment
    seed = args.seed if args.seed is not None else _env_int(ENV_SEED)
    if seed is not None:
        exp = replace(exp, root_seed=seed)
    jobs = args.jobs if args.jobs is not None else (_env_int(ENV_JOBS) or rc.jobs)
    if jobs < 1:
        raise UsageError("jobs must be >= 1")
    out = Path(args.out) if args.out else rc.results
    n_total = len(exp.combos) * exp.replications
    log.info("running %d records (%d combos x %d replicates), jobs=%d -> %s",
             n_total, len(exp.combos), exp.replications, jobs, out)
    outcome = run_detailed(exp, jobs=jobs, out=out, resume=args.resume)
    print(f"wrote {len(outcome.records)} records to {out}"
          + (f" ({outcome.skipped} already present)" if outcome.skipped else "")
          + (f"; {len(outcome.errors)} failed, see {out}.errors" if outcome.errors else ""))
    return EXIT_OK


def _load_rows(path, filters):
    records, _ = read_records(path)
    rows = stats.records_to_rows(records)
    for key, value in filters:
        if key not in ("clutter_type", "window", "n_obstacles", "replicate"):
            raise UsageError(f"--where: unknown column {key!r}")
        rows = [r for r in rows if str(r[key]) == value]
    return rows


def _parse_where(items):
    out = []
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--where expects column=value, got {item!r}")
        out.append(tuple(s.strip() for s in item.split("=", 1)))
    return out


def _fmt(v):
    return "NA" if isinstance(v, float) and math.isnan(v) else f"{v:.4f}"


def cmd_analyze(args):
    group_by = [g.strip() for g in args.group_by.split(",") if g.strip()]
    bad = [g for g in group_by if g not in stats.FACTOR_NAMES]
    if bad:
        raise UsageError(f"--group-by: unknown factor(s) {', '.join(bad)}; choose from {', '.join(stats.FACTOR_NAMES)}")
    rows = _load_rows(args.records, _parse_where(args.where))
    if not rows:
        raise ExperimentError("no records left after filtering")
    key = group_by[0] if len(group_by) == 1 else tuple(group_by)
    summary = stats.summarize(rows, key)
    print(",".join(group_by) + ",n,mean,sd,se")
    for r in summary:
        label = stats._label(r.group)
        print(f"{label.replace(':', ',')},{r.n},{_fmt(r.mean)},{_fmt(r.sd)},{_fmt(r.se)}")

    if args.anova:
        print()
        if len(group_by) == 1:
            table = stats.oneway_anova(stats.GroupedSample.from_rows(rows, key))
        else:
            varying = [g for g in group_by if len({r[g] for r in rows}) > 1]
            if len(varying) < len(group_by):
                print(f"# constant factor(s) dropped: {', '.join(g for g in group_by if g not in varying)}")
            if len(varying) == 1:
                table = stats.oneway_anova(stats.GroupedSample.from_rows(rows, varying[0]))
            else:
                table = stats.factorial_anova(rows, varying, include_interactions=not args.additive)
        print(table.format())

    if args.hsd:
        groups = stats.GroupedSample.from_rows(rows, key)
        if args.top:
            means = {r.group: r.mean for r in summary}
            keep = sorted(means, key=means.get, reverse=True)[:args.top]
            groups = stats.GroupedSample([(g, o) for g, o in groups.groups if g in keep])
        result = stats.tukey_hsd(groups, alpha=args.alpha)
        lines = result.csv_lines()
        print()
        print(f"# Tukey HSD, q_crit={result.q_crit:.4f} (alpha={args.alpha}, df={result.df_error})")
        print("\n".join(lines))
        if args.hsd_out:
            Path(args.hsd_out).write_text("\n".join(lines) + "\n", encoding="utf-8")

    if args.trend:
        print()
        print("clutter_type,window,trend,peak_n_obstacles")
        full = stats.summarize(rows, ("clutter_type", "window", "n_obstacles"))
        profiles = {}
        for r in full:
            profiles.setdefault(r.group[:2], []).append(r)
        for (ct, w), prof in profiles.items():
            if len(prof) < 3:
                continue
            means = [r.mean for r in prof]
            trend = stats.trend_check(means, stats.pooled_se(prof))
            print(f"{ct},{w},{trend},{prof[stats.peak_index(means)].group[2]}")

    if args.best:
        print()
        print("clutter_type,best_window,best_n_obstacles,mean,se")
        full = stats.summarize(rows, ("clutter_type", "window", "n_obstacles"))
        for ct, r in stats.best_performers(full).items():
            print(f"{ct},{r.group[1]},{r.group[2]},{_fmt(r.mean)},{_fmt(r.se)}")
    return EXIT_OK


def _parse_key(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--key expects clutter_type,window,n_obstacles,replicate")
    try:
        return TreatmentCombo.from_names(*parts[:3]), int(parts[3])
    except ValueError as exc:
        raise UsageError(f"--key: {exc}") from None


def cmd_replay(args):
    rc = load_config(args.config)
    exp = rc.experiment
    seed = args.seed if args.seed is not None else _env_int(ENV_SEED)
    if seed is not None:
        exp = replace(exp, root_seed=seed)
    records, _ = read_records(args.records)
    if args.key:
        wanted = _parse_key(args.key)
        records = [r for r in records if r.key == wanted]
        if not records:
            raise ExperimentError(f"no record with key {args.key} in {args.records}")
    mismatches = 0
    for rec in records:
        res = replay(rec, exp)
        same = res.total_length == rec.traversal_length and res.n_disambiguations == rec.n_disambiguations
        mismatches += not same
        if args.key or not same:
            print(f"{rec.combo},{rec.replicate}: recorded={rec.traversal_length!r} "
                  f"replayed={res.total_length!r} {'OK' if same else 'MISMATCH'}")
    print(f"replayed {len(records)} record(s), {mismatches} mismatch(es)")
    if mismatches:
        raise ReplayError(f"{mismatches} record(s) did not replay bit-identically")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="opdsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"opdsim {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample-clutter", help="sample a clutter pattern conditioned on its size")
    s.add_argument("--type", required=True, choices=sorted(CLUTTER_ALIASES))
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, help=f"RNG seed (default ${ENV_SEED} or 0)")
    s.add_argument("--out", help="pattern file to write")
    s.set_defaults(func=cmd_sample_clutter)

    s = sub.add_parser("place-obstacles", help="sample obstacle centres in one window")
    s.add_argument("--window", required=True, choices=WINDOW_CODES)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_place_obstacles)

    s = sub.add_parser("navigate", help="run the ARD navigator on a scene file")
    s.add_argument("--scene", required=True)
    s.add_argument("--trace", help="write the per-step trace here ('-' for stdout)")
    s.add_argument("--out", help="write the summary line here")
    s.add_argument("--penalty-rule", choices=("boundary", "any"), default="boundary")
    s.set_defaults(func=cmd_navigate)

    s = sub.add_parser("run-experiment", help="run a factorial experiment from a config file")
    s.add_argument("--config")
    s.add_argument("--jobs", type=int, help=f"worker processes (default ${ENV_JOBS} or the config)")
    s.add_argument("--seed", type=int, help=f"root seed override (default ${ENV_SEED} or the config)")
    s.add_argument("--out", help="results file (overrides [output] results)")
    s.add_argument("--resume", action="store_true", help="skip records already in the results file")
    s.add_argument("--print-defaults", action="store_true", help="print a config with every key and exit")
    s.set_defaults(func=cmd_run_experiment)

    s = sub.add_parser("analyze", help="summaries, ANOVA, Tukey HSD, trends, best performers")
    s.add_argument("--records", required=True)
    s.add_argument("--group-by", default="clutter_type,window,n_obstacles")
    s.add_argument("--where", action="append", metavar="COLUMN=VALUE", help="keep matching rows (repeatable)")
    s.add_argument("--anova", action="store_true")
    s.add_argument("--additive", action="store_true", help="ANOVA without interaction terms")
    s.add_argument("--hsd", action="store_true")
    s.add_argument("--top", type=int, help="restrict HSD to the N groups with the largest means")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--hsd-out", help="write the HSD pair table here")
    s.add_argument("--trend", action="store_true", help="classify each window's profile over obstacle counts")
    s.add_argument("--best", action="store_true", help="best (window, count) per clutter type")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("replay", help="re-run records from their seeds and compare")
    s.add_argument("--records", required=True)
    s.add_argument("--config", required=True)
    s.add_argument("--key", help="clutter_type,window,n_obstacles,replicate (default: every record)")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"opdsim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Unreachable, ConditioningError) as exc:
        print(f"opdsim: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvariantViolation, ReplayError) as exc:
        print(f"opdsim: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ConfigError, SceneError, ExperimentError, ValueError) as exc:
        print(f"opdsim: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"opdsim: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
