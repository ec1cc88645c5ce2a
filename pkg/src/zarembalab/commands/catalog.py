"""List command for the bundled experiments and the available tasks."""

from __future__ import annotations

import sys

from qualitybase.commands.base import Command

from ..helpers import get_experiments, get_tasks  # noqa: TID252


def _list_command(args: list[str]) -> bool:
    """List experiments (default) or tasks.

    Args:
        args: Command arguments.

    Returns:
        True if command executed successfully, False otherwise.
    """
    output_format = "table"
    what = "experiments"

    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--format" and i + 1 < len(args):
            output_format = args[i + 1]
            i += 2
        elif arg in ("experiments", "tasks"):
            what = arg
            i += 1
        else:
            print(f"Unknown argument: {arg}", file=sys.stderr)
            return False

    try:
        text = get_tasks(output_format) if what == "tasks" else get_experiments(output_format)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return False
    print(text)
    return True


list_command = Command(_list_command, "List bundled experiments or tasks ([experiments|tasks] --format [table|json|xml])")
