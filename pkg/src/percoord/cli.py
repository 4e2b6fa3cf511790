"""Command-line interface.

One subcommand per experiment. Flags mirror RunConfig fields; a --config
file (key = value lines) can pre-seed any of them, with explicit flags
winning. Results CSV goes to --out when given, else to stdout; log lines
go to stderr. Exit codes: 0 success, 1 failed run (non-converged
comparator, failed audit), 2 usage or input errors.
"""

import argparse
import logging
import sys

from .data_io import LibsvmParseError
from .harness import (
    RunConfig,
    UsageError,
    run_bounds_audit,
    run_classify,
    run_logreg,
    run_separation,
)

__all__ = ["build_parser", "main", "console_main"]

log = logging.getLogger("percoord")

_INT_FIELDS = {"seed", "rounds", "max_passes", "stream_count", "lemma_count"}
_FLOAT_FIELDS = {"radius", "scale_per_coord", "scale_global", "lam", "eps", "tol_rel"}
_BOOL_FIELDS = {"unit_scale", "figures", "timing"}
_TUPLE_FIELDS = {"algorithms", "t0_list"}
_STR_FIELDS = {"dataset", "eta_grid", "out"}
_ALL_FIELDS = _INT_FIELDS | _FLOAT_FIELDS | _BOOL_FIELDS | _TUPLE_FIELDS | _STR_FIELDS


def _parse_algorithms(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _parse_t0(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad oscillation length list {text!r}") from None


def _coerce(key, raw):
    raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise UsageError(f"config key {key!r} expects true/false, got {raw!r}")
    if key == "algorithms":
        return _parse_algorithms(raw)
    if key == "t0_list":
        try:
            return tuple(int(p) for p in raw.split(",") if p.strip())
        except ValueError:
            raise UsageError(f"config key t0_list expects integers, got {raw!r}") from None
    if key in _STR_FIELDS:
        return raw
    raise UsageError(f"unknown config key {key!r}")


def read_config_file(path):
    """Parse a key = value config file into RunConfig kwargs."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, raw = text.partition("=")
        if not sep:
            raise UsageError(f"{path} line {number}: expected key = value")
        key = key.strip().replace("-", "_")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise UsageError(f"{path} line {number}: {exc}") from None
    return values


def _add_common(sub):
    sub.add_argument("--quiet", action="store_true",
                     help="suppress progress logging on stderr")
    sub.add_argument("--config", metavar="FILE",
                     help="key = value file pre-seeding any flag below")
    sub.add_argument("--out", help="write the report here (default: stdout)")
    sub.add_argument("--seed", type=int, help="run seed (default 7)")
    sub.add_argument("--figures", action=argparse.BooleanOptionalAction,
                     help="render a companion PNG next to --out")
    sub.add_argument("--timing", action=argparse.BooleanOptionalAction,
                     help="fill the wall_ms column (disable for byte-stable output)")


def _add_dataset(sub, default_hint):
    sub.add_argument("--dataset",
                     help=f"libsvm path, bundled:sentiment, synthetic:ctr, or "
                          f"synthetic:sentiment (default {default_hint})")
    sub.add_argument("--unit-scale", action=argparse.BooleanOptionalAction,
                     help="scale each example to unit norm before the run")


def _add_scales(sub):
    sub.add_argument("--radius", type=float,
                     help="half-width R of the [-R, R]^n feasible box")
    sub.add_argument("--scale-per-coord", type=float,
                     help="rate multiplier for the per-coordinate learner")
    sub.add_argument("--scale-global", type=float,
                     help="rate multiplier for the adaptive-global learner")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="percoord",
        description="Benchmark harness for per-coordinate adaptive online "
                    "gradient descent over box constraints.",
    )
    subs = parser.add_subparsers(dest="experiment", required=True)

    classify = subs.add_parser(
        "classify", help="progressive-validation hinge loss and mistake rates")
    _add_common(classify)
    _add_dataset(classify, "bundled:sentiment")
    _add_scales(classify)
    classify.add_argument("--algorithms", type=_parse_algorithms,
                          help="comma list from: global, per-coord, pa")

    logreg = subs.add_parser(
        "logreg", help="regularized logistic regret against a static optimum")
    _add_common(logreg)
    _add_dataset(logreg, "synthetic:ctr")
    _add_scales(logreg)
    logreg.add_argument("--algorithms", type=_parse_algorithms,
                        help="comma list from: global, per-coord")
    logreg.add_argument("--lambda", dest="lam", type=float,
                        help="L2 regularization weight (default 1e-4)")
    logreg.add_argument("--rounds", type=int,
                        help="synthetic stream length (default 100000)")
    logreg.add_argument("--max-passes", type=int,
                        help="comparator pass budget (default 200)")
    logreg.add_argument("--tol-rel", type=float,
                        help="comparator relative stall tolerance (default 1e-6)")

    separation = subs.add_parser(
        "separation", help="adversarial family: tuned constant vs per-coordinate")
    _add_common(separation)
    separation.add_argument("--t0", dest="t0_list", type=_parse_t0,
                            help="comma list of oscillation lengths "
                                 "(default 1000,10000,100000)")
    separation.add_argument("--eta-grid",
                            help="constant-rate grid as lo:hi:num (default 1e-4:1:50)")
    separation.add_argument("--eps", type=float,
                            help="oscillation kink location in (0, 1) (default 0.01)")

    audit = subs.add_parser(
        "bounds-audit", help="randomized checks of regret bounds and inequalities")
    _add_common(audit)
    audit.add_argument("--stream-count", type=int,
                       help="random streams per learner battery (default 500)")
    audit.add_argument("--lemma-count", type=int,
                       help="random sequences for the prefix-sqrt battery "
                            "(default 10000)")

    return parser


def _build_config(args):
    kwargs = {}
    if getattr(args, "config", None):
        kwargs.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("experiment", "config", "quiet"):
            continue
        if value is not None:
            kwargs[key] = value
    unknown = set(kwargs) - _ALL_FIELDS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return RunConfig(experiment=args.experiment, **kwargs)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        config = _build_config(args)
        if args.experiment == "classify":
            result = run_classify(config)
        elif args.experiment == "logreg":
            result = run_logreg(config)
        elif args.experiment == "separation":
            result = run_separation(config)
        elif args.experiment == "bounds-audit":
            report, result = run_bounds_audit(config)
            if config.out:
                sys.stdout.write(report.render())
        else:  # unreachable: argparse restricts choices
            raise UsageError(f"unknown experiment {args.experiment!r}")
    except (UsageError, LibsvmParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not config.out and result.csv_text is not None:
        sys.stdout.write(result.csv_text)
    return result.exit_code


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
