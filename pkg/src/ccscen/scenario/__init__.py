"""Scenario programs, the interior-point solver and FAST."""

from .fast import fast_solve, max_feasible_step
from .program import (
    ScenarioProgram,
    build_joint_linear,
    build_quadratic_constraint,
    build_quadratic_objective,
    build_single_linear,
    dump_program,
    load_program,
    psd_clip,
)
from .solver import Solution, SolveStatus, solve

__all__ = [
    "ScenarioProgram",
    "Solution",
    "SolveStatus",
    "build_joint_linear",
    "build_quadratic_constraint",
    "build_quadratic_objective",
    "build_single_linear",
    "dump_program",
    "fast_solve",
    "load_program",
    "max_feasible_step",
    "psd_clip",
    "solve",
]
