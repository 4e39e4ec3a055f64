"""Command-line entry point.

    topoflock <experiment> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]

Exit codes: 0 success, 2 config validation failure, 3 numerical halt
(shock detected or integration blow-up), 4 I/O failure. All behaviour is
controlled by flags and the config file; no environment variables are read.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .dynamics import IntegrationError
from .euler import CFLError, ShockError
from .experiments import RUNNERS

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoflock",
        description="rank-weighted flocking simulations and convergence experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="rng seed (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results are thread-count independent)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"cannot read config: {err}", file=sys.stderr)
        return EXIT_IO

    problems = []
    if cfg.experiment != args.experiment:
        problems.append(
            f"experiment: config says {cfg.experiment!r} but the {args.experiment!r} subcommand was invoked"
        )
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            problems.append(f"--seed: must be in [0, 2^64), got {args.seed}")
        else:
            cfg.rng_seed = args.seed
    if args.threads < 1:
        problems.append(f"--threads: must be >= 1, got {args.threads}")
    if problems:
        print(ConfigError(problems), file=sys.stderr)
        return EXIT_VALIDATION
    if args.out is not None:
        cfg.out_dir = args.out

    runner = RUNNERS[args.experiment]
    try:
        manifest, halted = runner(cfg, threads=args.threads)
    except (ShockError, CFLError, IntegrationError) as err:
        print(f"numerical halt: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"invalid request: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"I/O failure: {err}", file=sys.stderr)
        return EXIT_IO

    for entry in manifest["files"]:
        print(f"wrote {manifest['out_dir']}/{entry['name']} ({entry['bytes']} bytes)")
    if halted:
        print("run halted early (see summary.json diagnostics)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
