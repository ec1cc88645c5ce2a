"""Sweep command: the disk-partition ν table with command-line mesh and grid sizes."""

from __future__ import annotations

import json
import sys
from typing import Any

from qualitybase.commands.base import Command

from ..helpers import apply_overrides, load_experiment, parse_number, run_experiment  # noqa: TID252
from ..kit.config import RuntimeSettings  # noqa: TID252

NUMERIC_FLAGS: dict[str, tuple[str, type[int] | type[float]]] = {
    "--threads": ("threads", int),
    "--h": ("h", float),
    "--count": ("eigencount", int),
    "--max-n": ("max_n", int),
}


def _sweep_command(args: list[str]) -> bool:
    """Run the disk sweep.

    Args:
        args: Command arguments.

    Returns:
        True if the sweep ran and passed its checks, False otherwise.
    """
    output: str | None = None
    numbers: dict[str, Any] = {}

    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--output" and i + 1 < len(args):
            output = args[i + 1]
            i += 2
        elif arg in NUMERIC_FLAGS and i + 1 < len(args):
            key, kind = NUMERIC_FLAGS[arg]
            value = parse_number(arg, args[i + 1], kind)
            if value is None:
                return False
            numbers[key] = value
            i += 2
        else:
            print(f"Unknown argument: {arg}", file=sys.stderr)
            return False

    options = {key: numbers[key] for key in ("eigencount", "max_n") if key in numbers}
    config = apply_overrides(load_experiment("disk-sweep"), h=numbers.get("h"), output=output, options=options)
    result = run_experiment(config, RuntimeSettings({"threads": numbers.get("threads")}))
    if result.error is not None:
        raise result.error
    report = result.report
    print(json.dumps({"argmin": report.get("argmin"), "separation": report.get("separation"),
                      **result.summary()}, indent=2, ensure_ascii=False))
    return result.passed


sweep_command = Command(_sweep_command, "Disk-partition nu sweep (--h --max-n --count --threads --output)")
