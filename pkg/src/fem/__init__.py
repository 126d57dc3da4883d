"""P1/P0 finite elements on structured unit-square meshes."""

from .assembly import (
    assemble_control_load,
    assemble_load,
    assemble_mass_p0,
    assemble_mass_p1,
    assemble_stiffness,
    extend_by_zero,
    interpolate_p1,
    l2_error_p1,
    restrict_to_interior,
    unit_stiffness_local,
)
from .functions import P0Function, P1Function, inner_l2, l1_norm, l2_inner, l2_norm, norms
from .linalg import DIRECT_SOLVE_LIMIT, SparseSpd, SpdFactor, is_symmetric, solve_spd
from .mesh import Mesh2D, build_unit_square_mesh

__all__ = [
    # Mesh
    "Mesh2D",
    "build_unit_square_mesh",

    # Assembly
    "assemble_stiffness",
    "assemble_mass_p1",
    "assemble_mass_p0",
    "assemble_control_load",
    "assemble_load",
    "interpolate_p1",
    "extend_by_zero",
    "l2_error_p1",
    "restrict_to_interior",
    "unit_stiffness_local",

    # Linear algebra
    "SparseSpd",
    "SpdFactor",
    "solve_spd",
    "is_symmetric",
    "DIRECT_SOLVE_LIMIT",

    # Discrete functions
    "P0Function",
    "P1Function",
    "norms",
    "inner_l2",
    "l2_norm",
    "l1_norm",
    "l2_inner",
]
