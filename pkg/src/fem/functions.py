"""Discrete P0 controls and P1 states with their L2/L1 norms."""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .assembly import assemble_mass_p1, extend_by_zero
from .mesh import Mesh2D


@dataclass(frozen=True, eq=False)
class P0Function:
    """Piecewise constant function: one coefficient per cell."""

    mesh: Mesh2D
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.mesh.num_cells,):
            raise ValueError(
                f"P0 function needs {self.mesh.num_cells} cell values, got shape {self.values.shape}"
            )

    def l2(self) -> float:
        return l2_norm(self.mesh, self.values)

    def l1(self) -> float:
        return l1_norm(self.mesh, self.values)


@dataclass(frozen=True, eq=False)
class P1Function:
    """Continuous piecewise linear function vanishing on the boundary; coefficients on free vertices."""

    mesh: Mesh2D
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.mesh.num_interior,):
            raise ValueError(
                f"P1 function needs {self.mesh.num_interior} interior values, got shape {self.values.shape}"
            )

    def vertex_values(self) -> np.ndarray:
        return extend_by_zero(self.mesh, self.values)

    def l2(self) -> float:
        mass = assemble_mass_p1(self.mesh, interior_only=True).matrix
        return float(np.sqrt(self.values @ (mass @ self.values)))


def l2_norm(mesh: Mesh2D, values: np.ndarray) -> float:
    return float(np.sqrt(mesh.cell_area * np.dot(values, values)))


def l1_norm(mesh: Mesh2D, values: np.ndarray) -> float:
    return float(mesh.cell_area * np.abs(values).sum())


def l2_inner(mesh: Mesh2D, u: np.ndarray, v: np.ndarray) -> float:
    return float(mesh.cell_area * np.dot(u, v))


def _check_same_mesh(u: P0Function, v: P0Function) -> None:
    if u.mesh is not v.mesh and u.mesh.n != v.mesh.n:
        raise ValueError(f"Mesh mismatch: n={u.mesh.n} vs n={v.mesh.n}")


def norms(u: P0Function) -> Dict[str, float]:
    return {"l2": u.l2(), "l1": u.l1()}


def inner_l2(u: P0Function, v: P0Function) -> float:
    _check_same_mesh(u, v)
    return l2_inner(u.mesh, u.values, v.values)
