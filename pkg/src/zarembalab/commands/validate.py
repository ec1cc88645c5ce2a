"""Validate command: schema-check experiment configs or print the schema."""

from __future__ import annotations

import json
import sys

from qualitybase.commands.base import Command

from ..errors import ConfigError  # noqa: TID252
from ..helpers import EXPERIMENTS_DIR, load_experiment  # noqa: TID252
from ..schema import json_schema  # noqa: TID252


def _validate_command(args: list[str]) -> bool:
    """Validate configs by path or name; ``--all`` checks the bundled catalog.

    Args:
        args: Command arguments.

    Returns:
        True if every config is valid.

    Raises:
        ConfigError: At least one config is invalid (exit 2).
    """
    targets: list[str] = []
    schema = False

    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--schema":
            schema = True
            i += 1
        elif arg == "--all":
            targets += [str(p) for p in sorted(EXPERIMENTS_DIR.glob("*.json"))]
            i += 1
        elif not arg.startswith("--"):
            targets.append(arg)
            i += 1
        else:
            print(f"Unknown argument: {arg}", file=sys.stderr)
            return False

    if schema:
        print(json.dumps(json_schema(), indent=2, sort_keys=True))
        if not targets:
            return True

    invalid = []
    for target in targets:
        try:
            config = load_experiment(target)
        except ConfigError as exc:
            print(exc.report(), file=sys.stderr)
            invalid.append(target)
            continue
        print(f"ok {config.name} ({config.task})")
    if invalid:
        raise ConfigError(f"{len(invalid)} invalid config(s)", configs=invalid)
    return True


validate_command = Command(_validate_command, "Validate configs (paths, names or --all; --schema prints the JSON schema)")
