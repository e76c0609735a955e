"""
Command-line interface for parrep-sensitivity.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config.run_config import RunConfig, flag_overrides, list_presets, parse_config, preset_path
from .core.parser import NetworkParser, builtin_names
from .exceptions import BoxTooSmall, NetworkDefinitionError, ParRepError, SchemaError
from .experiment import ExperimentResult, ExperimentRunner
from .models.builtins import get_builtin
from .utils.file_handler import FileHandler

EXIT_OK = 0
EXIT_SIMULATION = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Run seed")
    parser.add_argument("--t-end", type=float, help="Simulated time per trajectory")
    parser.add_argument("--n-traj", type=int, help="Number of independent trajectories")
    parser.add_argument("--replicas", type=int, help="ParRep replica count R")
    parser.add_argument(
        "--threads",
        type=int,
        help="Physical parallelism (does not change results)",
    )
    parser.add_argument("-o", "--output", type=Path, help="Output directory")
    parser.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override any config field, e.g. --set parrep.n_c=1000 (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description=(
            "Parallel replica simulation and sensitivity bounds for bistable reaction networks"
        ),
        prog="parrep",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for progress messages, -vv for per-phase detail",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the experiment described by a config file")
    run.add_argument(
        "config",
        help="Run config file, directory of config files, or the name of a shipped preset",
    )
    _add_override_flags(run)

    reproduce = commands.add_parser("reproduce", help="Run a shipped reproduce target")
    reproduce.add_argument("target", nargs="?", help=f"One of: {', '.join(list_presets())}")
    reproduce.add_argument("--list", action="store_true", help="List reproduce targets and exit")
    _add_override_flags(reproduce)

    speedup = commands.add_parser(
        "speedup", help="Time SSA against ParRep for every replica count in speedup.replicas"
    )
    speedup.add_argument("config", help="Run config file (or the name of a shipped preset)")
    _add_override_flags(speedup)

    export = commands.add_parser("export-model", help="Write a built-in network as a YAML document")
    export.add_argument("name", help=f"One of: {', '.join(builtin_names())}")
    export.add_argument("-o", "--output", type=Path, help="Output file (stdout when omitted)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return flag_overrides(
        seed=args.seed,
        t_end=args.t_end,
        n_traj=args.n_traj,
        replicas=args.replicas,
        threads=args.threads,
        output=str(args.output) if args.output is not None else None,
        assignments=args.assignments,
    )


def load_config(reference: str, overrides: Dict[str, Any]) -> RunConfig:
    """
    Parse a config file, falling back to a shipped preset of that name.

    Raises:
        FileNotFoundError: If neither a file nor a preset matches
    """
    path = Path(reference)
    if not path.is_file():
        try:
            path = preset_path(reference)
        except KeyError:
            raise FileNotFoundError(f"Config file not found: {reference}") from None
    return parse_config(path, overrides)


def _report_files(result: ExperimentResult, verbose: int) -> None:
    state = "completed" if result.completed else "incomplete"
    print(f"✓ {result.mode} run {state}; wrote {len(result.files)} file(s)")
    if verbose:
        for file_path in result.files:
            print(f"  - {file_path}")


def cmd_run(args: argparse.Namespace) -> int:
    source = Path(args.config)
    if not source.is_dir():
        config = load_config(args.config, _overrides(args))
        _report_files(ExperimentRunner(config).run(), args.verbose)
        return EXIT_OK

    # each config of a directory batch writes to <output>/<config stem>
    configs = FileHandler.find_files(source)
    if not configs:
        print(f"No config files found in {source}", file=sys.stderr)
        return EXIT_CONFIG
    for i, path in enumerate(configs, 1):
        print(f"[{i}/{len(configs)}] {path.name}")
        overrides = _overrides(args)
        base = Path(overrides.get("output.directory", "results"))
        overrides["output.directory"] = str(base / path.stem)
        _report_files(ExperimentRunner(parse_config(path, overrides)).run(), args.verbose)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    if args.list or not args.target:
        for name in list_presets():
            print(name)
        return EXIT_OK
    config = parse_config(preset_path(args.target), _overrides(args))
    if config.mirrors:
        print(f"Reproducing {args.target}: {config.mirrors}")
    _report_files(ExperimentRunner(config).run(), args.verbose)
    return EXIT_OK


def cmd_speedup(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    result = ExperimentRunner(config).speedup_sweep()
    for record in result.speedup:
        print(
            f"R={record.replicas:>4}  serial {record.serial_wall_time:10.3f}s  "
            f"parrep {record.parrep_wall_time:10.3f}s  speedup {record.speedup:7.2f}"
        )
    _report_files(result, args.verbose)
    return EXIT_OK


def cmd_export_model(args: argparse.Namespace) -> int:
    text = NetworkParser.dump(get_builtin(args.name))
    if args.output is None:
        sys.stdout.write(text)
    else:
        FileHandler.write_text(args.output, text)
        print(f"✓ Exported {args.name}: {args.output}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "reproduce": cmd_reproduce,
    "speedup": cmd_speedup,
    "export-model": cmd_export_model,
}


def _error(error_class: str, message: str) -> None:
    print(f"error: {error_class}: {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        return EXIT_INTERRUPTED
    except (SchemaError, NetworkDefinitionError, BoxTooSmall) as e:
        _error(e.error_class, str(e))
        return EXIT_CONFIG
    except ParRepError as e:
        _error(e.error_class, str(e))
        return EXIT_SIMULATION
    except (KeyError, FileNotFoundError) as e:
        _error(type(e).__name__, e.args[0] if e.args else str(e))
        return EXIT_CONFIG
    except Exception as e:
        _error(type(e).__name__, str(e))
        if args.verbose:
            import traceback

            traceback.print_exc()
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
