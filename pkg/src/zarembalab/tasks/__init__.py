"""Experiment tasks; each module defines one ``*Task`` class."""

from .compare import CompareTask
from .cover_check import CoverCheckTask
from .dtn_scan import DtnScanTask
from .heat_fit import HeatFitTask
from .solve import SolveTask
from .sweep import SweepTask
from .symmetry_pair import SymmetryPairTask

__all__ = [
    "CompareTask",
    "CoverCheckTask",
    "DtnScanTask",
    "HeatFitTask",
    "SolveTask",
    "SweepTask",
    "SymmetryPairTask",
]
