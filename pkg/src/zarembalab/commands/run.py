"""Run command: execute experiment configs and write their result bundles."""

from __future__ import annotations

import json
import sys
from typing import Any

from qualitybase.commands.base import Command

from ..helpers import (  # noqa: TID252
    apply_overrides,
    list_experiments,
    load_experiment,
    parse_number,
    run_catalog,
    run_experiment,
    worst_error,
)
from ..kit.config import RuntimeSettings  # noqa: TID252

NUMERIC_FLAGS: dict[str, type[int] | type[float]] = {"--threads": int, "--h": float, "--count": int}


def _run_command(args: list[str]) -> bool:  # noqa: C901
    """Run experiments by name or config path.

    ``--h`` and ``--count`` override every selected config, also with ``--all``.

    Args:
        args: Command arguments.

    Returns:
        True if every run passed its checks, False otherwise.

    Raises:
        LabError: A run failed; with several runs, the one with the highest
            exit code, after all summaries are printed.
    """
    targets: list[str] = []
    run_all = False
    output: str | None = None
    numbers: dict[str, Any] = {}

    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--all":
            run_all = True
            i += 1
        elif arg == "--output" and i + 1 < len(args):
            output = args[i + 1]
            i += 2
        elif arg in NUMERIC_FLAGS and i + 1 < len(args):
            value = parse_number(arg, args[i + 1], NUMERIC_FLAGS[arg])
            if value is None:
                return False
            numbers[arg[2:]] = value
            i += 2
        elif not arg.startswith("--"):
            targets.append(arg)
            i += 1
        else:
            print(f"Unknown argument: {arg}", file=sys.stderr)
            return False

    if not targets and not run_all:
        print("Nothing to run: give experiment names, config paths or --all", file=sys.stderr)
        return False

    settings = RuntimeSettings({"output_root": output, "threads": numbers.get("threads")})
    overrides = {key: numbers[key] for key in ("h", "count") if key in numbers}
    if run_all or len(targets) > 1:
        names = sorted(list_experiments()) if run_all else targets
        results = run_catalog(names, settings, overrides=overrides)
        print(json.dumps([r.summary() for r in results], indent=2, ensure_ascii=False))
        error = worst_error(results)
        if error is not None:
            raise error
        return all(r.passed for r in results)

    config = load_experiment(targets[0])
    if overrides:
        config = apply_overrides(config, **overrides)
    result = run_experiment(config, settings)
    if result.error is not None:
        raise result.error
    print(json.dumps(result.summary(), indent=2, ensure_ascii=False))
    return result.passed


run_command = Command(_run_command, "Run experiments (names, config paths or --all; --output --threads --h --count)")
