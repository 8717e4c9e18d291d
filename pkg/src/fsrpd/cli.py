"""Command line experiment harness.

Exit codes: 0 on success, 2 on configuration errors, 3 when a run reports a
property violation (an exact identity broken, a zero-tolerance check failed,
or a summary statistic outside its threshold).
"""

from __future__ import annotations

import argparse
import json
import sys

from .defaults import THRESHOLDS
from .experiments import RUNNERS, ConfigError, ExperimentConfig, write_output
from .pdstats import dickman_rho, schedule_distance

_CSV_SCHEMAS = {
    "pd": (
        "trial, a1_over_n (scaled age-ordered first cycle), l1_over_n "
        "(scaled largest cycle), l1_le_half, n_cycles, d_to_pd_ref, "
        "d_pd_baseline"
    ),
    "same-cycle": "trial, cocyclic, j_distinct, sigma (one-line, dash separated)",
    "edit-verify": "trial, g, detg_ok, gkt, cut_ok",
    "toggle-verify": (
        "trial, happy, matching_ok, delta_cycles_ok, schedule_distance"
    ),
    "oracle": "check, ok, detail",
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=12, help="register width")
    sub.add_argument("--k", type=int, default=2, help="number of starting windows")
    sub.add_argument("--m", type=int, default=1, help="number of toggle regions")
    sub.add_argument("--t", type=int, default=0, help="walk length (0 = default)")
    sub.add_argument("--trials", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="output file path")
    sub.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
    sub.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub.add_argument(
        "--threshold",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help=f"override a default threshold (known: {', '.join(sorted(THRESHOLDS))})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsrpd",
        description="Cycle statistics of random feedback shift registers.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("pd", "same-cycle", "edit-verify", "toggle-verify", "oracle"):
        sub = subs.add_parser(
            name,
            help=f"run the {name} experiment",
            epilog=f"CSV columns: {_CSV_SCHEMAS[name]}",
        )
        _add_common(sub)
        if name == "edit-verify":
            sub.add_argument(
                "--check-g-freq",
                action="store_true",
                help="flag a violation when the good-event frequency is below "
                "its threshold",
            )
        if name == "toggle-verify":
            sub.add_argument(
                "--dmax",
                type=int,
                default=0,
                help="region displacement bound (0 = preset)",
            )

    dick = subs.add_parser("dickman", help="evaluate the Dickman function")
    dick.add_argument("--u", type=float, required=True)

    sched = subs.add_parser(
        "schedule", help="exact distance of a schedule word to uniform"
    )
    sched.add_argument("--k", type=int, required=True)
    sched.add_argument(
        "--word",
        required=True,
        help="space separated color pairs, e.g. '1,2 1,3 2,3'",
    )
    return parser


def _parse_thresholds(pairs: list[str]) -> dict[str, float]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"expected NAME=VALUE, got {pair!r}")
        name, _, value = pair.partition("=")
        try:
            out[name] = float(value)
        except ValueError:
            raise ConfigError(f"threshold {name!r} needs a number, got {value!r}")
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "dickman":
        print(dickman_rho(args.u))
        return 0
    if args.command == "schedule":
        try:
            word = [
                tuple(int(x) for x in letter.split(","))
                for letter in args.word.split()
            ]
            dist = schedule_distance(word, args.k)
        except ValueError as err:
            print(f"config error: {err}", file=sys.stderr)
            return 2
        print(
            json.dumps(
                {
                    "k": args.k,
                    "word": [list(w) for w in word],
                    "distance": float(dist),
                    "distance_exact": f"{dist.numerator}/{dist.denominator}",
                }
            )
        )
        return 0

    try:
        cfg = ExperimentConfig(
            experiment=args.command,
            n=args.n,
            k=args.k,
            m=args.m,
            t=args.t,
            trials=args.trials,
            seed=args.seed,
            out=args.out,
            fmt=args.fmt,
            jobs=args.jobs,
            dmax=getattr(args, "dmax", 0),
            check_g_freq=getattr(args, "check_g_freq", False),
            thresholds=_parse_thresholds(args.threshold),
        )
        cfg.validate()
        rows, summary = RUNNERS[args.command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    write_output(rows, summary, cfg)
    print(json.dumps(summary, sort_keys=True))
    return 3 if summary["violations"] else 0


if __name__ == "__main__":
    sys.exit(main())
