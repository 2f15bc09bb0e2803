"""Least-squares (corrector) approach to controllability of the 1D heat equation."""

from .corrector import (
    BOUNDARY_EXTENDED,
    BOUNDARY_H1,
    CorrectorSolution,
    Variant,
    energy_product,
    inner_variant,
    solve_corrector,
)
from .descent import DescentOptions, RunResult, minimize
from .grid import SpaceTag, SpaceTimeGrid, dof_mask, make_grid
from .problems import (
    Control,
    ProblemSpec,
    extract_boundary_control,
    extract_inner_control,
    lift_data,
)
from .verify import ForwardGrid, forward_heat

__all__ = [
    "BOUNDARY_EXTENDED",
    "BOUNDARY_H1",
    "Control",
    "CorrectorSolution",
    "DescentOptions",
    "ForwardGrid",
    "ProblemSpec",
    "RunResult",
    "SpaceTag",
    "SpaceTimeGrid",
    "Variant",
    "dof_mask",
    "energy_product",
    "extract_boundary_control",
    "extract_inner_control",
    "forward_heat",
    "inner_variant",
    "lift_data",
    "make_grid",
    "minimize",
    "solve_corrector",
]
