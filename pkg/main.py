#!/usr/bin/env python3
"""CLI for cvsteg: run the eavesdropping experiments and dump their data."""

import argparse
import json
import logging
import sys
from pathlib import Path

from cvsteg.errors import ConfigError, CvstegError
from cvsteg.experiments import CATALOG, FORMATS, ExperimentConfig, list_experiments, run_experiment

logger = logging.getLogger("cvsteg")


def _option(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument(
        "-o", "--output",
        help="Output directory (default: results/<experiment>)"
    )
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default="csv",
        help="Data file format (default: csv)"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="Seed for Monte-Carlo experiments (default: 0)"
    )
    parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Set an experiment parameter; may be repeated"
    )
    parser.add_argument(
        "--strict",
        action="store_true",
        help="Fail with exit code 3 when truncation loses more than tau_norm"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only warnings and errors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvsteg",
        description="Eavesdropping on continuous-variable teleportation and dense coding",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    %(prog)s list
    %(prog)s cat-teleport --channel wiretap --eta .9 --shots 2000 --seed 7
    %(prog)s bell-test -o results/bell
    %(prog)s wigner --state gkp --theta 0 --format json
        """
    )
    commands = parser.add_subparsers(dest="command", required=True)

    listing = commands.add_parser("list", help="Show the experiment catalog")
    listing.add_argument("--json", action="store_true", help="Print the catalog as JSON")

    for name in sorted(CATALOG):
        entry = CATALOG[name]
        sub = commands.add_parser(name, help=entry.summary, description=f"{entry.summary} ({entry.anchor})")
        for spec in entry.params:
            sub.add_argument(
                _option(spec.name),
                dest=f"param_{spec.name}",
                default=None,
                choices=spec.choices,
                help=f"{spec.help} (default: {spec.default})",
            )
        _add_common(sub)
    return parser


def _configure_logging(args):
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def _collect_params(args) -> dict:
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        params[key.strip().replace("-", "_")] = value.strip()
    for key, value in vars(args).items():
        if key.startswith("param_") and value is not None:
            params[key[len("param_"):]] = value
    return params


def _print_catalog(as_json: bool):
    catalog = list_experiments()
    if as_json:
        print(json.dumps(catalog, indent=2))
        return
    for entry in catalog:
        print(f"{entry['name']:<16} {entry['anchor']}")
        print(f"{'':<16} {entry['summary']}")
        for param in entry["params"]:
            print(f"{'':<18}{_option(param['name'])} [{param['type']}] = {param['default']}")


def _report_error(exc: Exception, exit_code: int, output_dir: Path):
    print(f"Error: {exc}", file=sys.stderr)
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code}
    print(json.dumps(record), file=sys.stderr)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        with open(output_dir / "error.json", "w", encoding="utf-8") as f:
            json.dump(record, f, indent=2)
    except OSError:
        logger.debug("could not write error.json to %s", output_dir)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)

    if args.command == "list":
        _print_catalog(args.json)
        return 0

    output_dir = Path(args.output) if args.output else Path("results") / args.command
    try:
        config = ExperimentConfig(
            experiment=args.command,
            params=_collect_params(args),
            output=str(output_dir),
            format=args.format,
            seed=args.seed,
            strict=args.strict,
        )
        record = run_experiment(config)
    except CvstegError as exc:
        _report_error(exc, exc.exit_code, output_dir)
        return exc.exit_code
    except Exception as exc:
        _report_error(exc, 1, output_dir)
        return 1

    if not args.quiet:
        for path in record.files + [record.manifest_path]:
            print(f"Created: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
