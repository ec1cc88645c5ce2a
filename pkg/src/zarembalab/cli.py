"""Command-line interface with automatic command discovery."""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from qualitybase.cli import (
    CommandInfo,
    _get_package_name_from_path,
    cli_main,
    discover_commands,
)

from .errors import LabError

if TYPE_CHECKING:
    from collections.abc import Sequence

cli_file_path = Path(__file__)
VERBOSE_FLAGS = ("-v", "--verbose")


def _discover_commands() -> dict[str, CommandInfo]:
    """Discover commands using default cli file path."""
    result: dict[str, CommandInfo] = discover_commands(cli_file_path)
    return result


def _get_package_name() -> str:
    """Get package name using default cli file path."""
    result: str = _get_package_name_from_path(cli_file_path)
    return result


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Main CLI entry point.

    Lab errors are printed as a JSON report on stderr and mapped to their exit
    code (2 for configuration errors, 3 for numerical failures).
    """
    args = list(sys.argv[1:] if argv is None else argv)
    setup_logging(any(a in VERBOSE_FLAGS for a in args))
    args = [a for a in args if a not in VERBOSE_FLAGS]
    try:
        result = cli_main(cli_file_path, args)
    except LabError as exc:
        print(exc.report(), file=sys.stderr)
        return exc.exit_code
    if isinstance(result, bool):
        return 0 if result else 1
    return int(result) if isinstance(result, int) else (0 if result else 1)


if __name__ == "__main__":
    sys.exit(main())
