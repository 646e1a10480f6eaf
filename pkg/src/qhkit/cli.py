"""Command-line interface: run, validate, and list batch experiments.

Exit codes: 0 on success, 1 when an experiment reports invariant violations,
2 on configuration errors.
"""

import argparse
import json
import sys

from .errors import ConfigError, QhkitError
from .experiments import EXPERIMENT_NAMES, ExperimentConfig, run_experiment, write_report


def _load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qhkit", description="quasihyperbolic geometry experiment runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", required=True, help="report output path")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")

    p_val = sub.add_parser("validate", help="validate an experiment config")
    p_val.add_argument("config", help="path to a JSON experiment config")

    sub.add_parser("list-experiments", help="list known experiment names")

    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in EXPERIMENT_NAMES:
            print(name)
        return 0

    try:
        config = _load_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {config.name}")
        return 0

    try:
        report = run_experiment(config)
        write_report(report, args.out, args.format)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except QhkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    violations = int(report.summary.get("violations", 0))
    print(
        f"{config.name}: rows={report.summary.get('rows')} "
        f"violations={violations} wall={report.wall_time_s:.1f}s -> {args.out}"
    )
    for note in report.notes:
        print(f"note: {note}")
    return 1 if violations > 0 else 0


if __name__ == "__main__":
    sys.exit(main())
