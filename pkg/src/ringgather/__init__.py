"""Asynchronous gathering of anonymous oblivious robots on a ring with local
weak multiplicity detection: simulator, protocol and exhaustive checker."""

from .checker import Verdict, check_instances, enumerate_initials, explore, explore_many
from .executor import GATHERED, ROUND_LIMIT, VIOLATION, RunResult, decide, run
from .observation import View, view_at
from .phase1 import MoveIntent, Phase1Class, classify_phase1, phase1_moves
from .phase2 import CspClass, classify_csp, phase2_moves
from .ring_core import (
    Configuration,
    ConfigurationError,
    SymmetryClass,
    classify_symmetry,
    d_blocks,
    holes,
    node_blocks,
)
from .schedulers import SCHEDULERS, make_scheduler

__all__ = [
    "Configuration", "ConfigurationError", "CspClass", "GATHERED", "MoveIntent",
    "Phase1Class", "ROUND_LIMIT", "RunResult", "SCHEDULERS", "SymmetryClass",
    "VIOLATION", "Verdict", "View", "check_instances", "classify_csp",
    "classify_phase1", "classify_symmetry", "d_blocks", "decide", "enumerate_initials",
    "explore", "explore_many", "holes", "make_scheduler", "node_blocks",
    "phase1_moves", "phase2_moves", "run", "view_at",
]
