"""Command-line entry point: simulate, train, analyze, compare.

Exit codes: 0 success, 2 the simulation fell or diverged (or training
diverged), 1 usage, configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from husl.harness.analysis import analyze_run, compare_runs, load_report
from husl.harness.config import ConfigError, load_config
from husl.harness.run import run_scenario
from husl.harness.runlog import ConfigMismatchError, LogFormatError, read_log
from husl.learning.policy import CheckpointError, TrainingDivergedError
from husl.learning.train import train
from husl.metrics import OrientationUndefinedError

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2

log = logging.getLogger("husl")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _simulate(args) -> int:
    config = load_config(args.config)
    result = run_scenario(config, args.out)
    log.info("%s seed=%d: %d rows, status %s", config.kind.value, config.seed, len(result.rows), result.status)
    return EXIT_OK if result.status == "ok" else EXIT_DIVERGED


def _train(args) -> int:
    config = load_config(args.config)
    try:
        result = train(config.train_config(), args.log, args.checkpoint)
    except TrainingDivergedError as exc:
        log.error("training diverged: %s", exc)
        return EXIT_DIVERGED
    last = result.rows[-1]
    log.info("trained %d steps; final mean return %.3f, mean length %.1f", *last)
    return EXIT_OK


def _analyze(args) -> int:
    run = read_log(args.run)
    baseline = read_log(args.baseline)
    if args.config is not None:
        run.check_config(load_config(args.config).hash())
    report = analyze_run(run, baseline)
    Path(args.report).write_text(report.to_json())
    return EXIT_OK


def _compare(args) -> int:
    names = args.name or [Path(p).stem for p in args.report]
    if len(names) != len(args.report):
        raise ValueError("give one --name per --report")
    table = compare_runs([(n, load_report(p)) for n, p in zip(names, args.report)])
    Path(args.out).write_text(table.render())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="husl", description="Reduced-order walker with supernumerary arms.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one scenario and write the CSV log")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_simulate)

    p = sub.add_parser("train", help="train the footstep-residual policy")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--log", required=True)
    p.set_defaults(func=_train)

    p = sub.add_parser("analyze", help="compute the JSON report of a run against a baseline run")
    p.add_argument("--run", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--config", help="verify the run log was produced by this config")
    p.set_defaults(func=_analyze)

    p = sub.add_parser("compare", help="tabulate several reports")
    p.add_argument("--report", nargs="+", required=True)
    p.add_argument("--name", nargs="+", help="row names (default: report file stems)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ConfigError, LogFormatError, ConfigMismatchError, CheckpointError,
            OrientationUndefinedError, ValueError) as exc:
        print(f"husl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
