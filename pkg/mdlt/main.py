"""
mdlt - Command-Line Entry Point
===============================

Batch front end for the Laplace toolkit:

    mdlt <command> --input <path> --output <path> [--format csv|json] [--seed N]

Commands: transform, invert, region, pairs, solve, schedule.
Exit codes: 0 success, 1 configuration or schema error, 2 numerical-quality failure.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from mdlt import __version__
from mdlt.config import settings, setup_runtime_environment
from mdlt.commands import command_handlers
from mdlt.core.errors import LaplaceToolkitError
from mdlt.core.result_writer import result_writer
from mdlt.models.run import Command, OutputFormat, RunConfig


def configure_logging():
    """stderr sink at settings.log_level plus an optional rotating file sink."""
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=settings.log_level
    )

    if settings.log_file:
        logger.add(settings.log_file, rotation="10 MB", retention="7 days")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdlt",
        description="Multidimensional vector-valued Laplace transform toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=[c.value for c in Command], help="Command to run")
    parser.add_argument("--input", required=True, help="JSON input document")
    parser.add_argument("--output", default=None,
                        help="Output table (default: <results_path>/<command>.<format>)")
    parser.add_argument("--format", default=OutputFormat.CSV.value,
                        choices=[f.value for f in OutputFormat], help="Output format")
    parser.add_argument("--seed", type=int, default=0, help="Seed for randomized checks")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging()

    try:
        output = args.output
        if output is None:
            setup_runtime_environment()
            output = Path(settings.results_path) / f"{args.command}.{args.format}"
        cfg = RunConfig(command=args.command, input=args.input, output=output,
                        format=args.format, seed=args.seed)
        document = json.loads(cfg.input.read_text())
        logger.info(f"Running {cfg.command.value} on {cfg.input}")
        table = command_handlers[cfg.command](document, cfg.seed)
        result_writer.write(table, cfg.output, cfg.format)
    except ValidationError as e:
        logger.error(f"Invalid configuration:\n{e}")
        return 1
    except json.JSONDecodeError as e:
        logger.error(f"Input is not valid JSON: {e}")
        return 1
    except LaplaceToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 1

    logger.info(f"{cfg.command.value} finished with exit code {table.exit_code}")
    return table.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
