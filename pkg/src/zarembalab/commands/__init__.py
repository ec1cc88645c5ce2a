from .catalog import list_command
from .export import export_command
from .run import run_command
from .sweep import sweep_command
from .validate import validate_command

__all__ = ["export_command", "list_command", "run_command", "sweep_command", "validate_command"]
