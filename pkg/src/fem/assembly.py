"""
P1/P0 assembly on Mesh2D.

All integrands are polynomial on cells except closed-form loads, which use a
degree-4 symmetric triangle rule. Dirichlet conditions are imposed by
eliminating the boundary rows and columns.
"""

from typing import Callable, Union

import numpy as np
import scipy.sparse as sps

from .linalg import SparseSpd
from .mesh import Mesh2D

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Degree-4 rule on the reference triangle: barycentric points, weights summing to 1
_QUAD_BARY = np.array(
    [
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
    ]
)
_QUAD_WEIGHTS = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)

_P1_LOCAL_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0


def barycentric_gradients(mesh: Mesh2D) -> np.ndarray:
    """Gradients of the three hat functions on every cell, shape (C, 3, 2)."""
    p = mesh.vertices[mesh.cells]
    x, y = p[..., 0], p[..., 1]
    two_area = 2.0 * mesh.signed_areas()
    grads = np.empty((mesh.num_cells, 3, 2))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        grads[:, a, 0] = (y[:, b] - y[:, c]) / two_area
        grads[:, a, 1] = (x[:, c] - x[:, b]) / two_area
    return grads


def _scatter(mesh: Mesh2D, local: np.ndarray) -> sps.csr_matrix:
    rows = np.repeat(mesh.cells, 3, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 3)).ravel()
    matrix = sps.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.num_vertices, mesh.num_vertices)
    ).tocsr()
    matrix.sum_duplicates()
    return matrix


def restrict_to_interior(matrix: sps.spmatrix, mesh: Mesh2D) -> sps.csr_matrix:
    """Drop Dirichlet rows and columns."""
    free = mesh.interior
    return sps.csr_matrix(matrix)[free][:, free]


def cell_coefficients(mesh: Mesh2D, kappa: Union[float, np.ndarray]) -> np.ndarray:
    values = np.broadcast_to(np.asarray(kappa, dtype=float), (mesh.num_cells,))
    if not np.all(values > 0):
        raise ValueError("Diffusion coefficients must be strictly positive on every cell")
    return values


def unit_stiffness_local(mesh: Mesh2D) -> np.ndarray:
    """Per-cell local stiffness matrices for kappa = 1, shape (C, 3, 3)."""
    grads = barycentric_gradients(mesh)
    areas = mesh.signed_areas()
    return areas[:, None, None] * np.einsum("cad,cbd->cab", grads, grads)


def assemble_stiffness(mesh: Mesh2D, kappa: Union[float, np.ndarray]) -> SparseSpd:
    """Stiffness of -div(kappa grad y) on the interior vertices."""
    coeffs = cell_coefficients(mesh, kappa)
    local = coeffs[:, None, None] * unit_stiffness_local(mesh)
    return SparseSpd.from_matrix(restrict_to_interior(_scatter(mesh, local), mesh))


def assemble_mass_p1(mesh: Mesh2D, interior_only: bool = False) -> SparseSpd:
    """P1 mass matrix; over all vertices unless interior_only."""
    areas = mesh.signed_areas()
    full = _scatter(mesh, areas[:, None, None] * _P1_LOCAL_MASS[None])
    if interior_only:
        full = restrict_to_interior(full, mesh)
    return SparseSpd.from_matrix(full)


def assemble_mass_p0(mesh: Mesh2D) -> np.ndarray:
    """Diagonal of the P0 mass matrix (cell areas)."""
    return mesh.signed_areas().copy()


def assemble_control_load(mesh: Mesh2D, interior_only: bool = True) -> sps.csr_matrix:
    """Operator mapping P0 control coefficients to the P1 load: entry (i, c) = integral of phi_i over c."""
    areas = mesh.signed_areas()
    rows = mesh.cells.ravel()
    cols = np.repeat(np.arange(mesh.num_cells), 3)
    data = np.repeat(areas / 3.0, 3)
    load = sps.coo_matrix((data, (rows, cols)), shape=(mesh.num_vertices, mesh.num_cells)).tocsr()
    load.sum_duplicates()
    if interior_only:
        load = load[mesh.interior]
    return load


def quadrature_points(mesh: Mesh2D) -> np.ndarray:
    """Physical quadrature points, shape (C, Q, 2)."""
    return np.einsum("qa,cad->cqd", _QUAD_BARY, mesh.vertices[mesh.cells])


def assemble_load(mesh: Mesh2D, f: Field, interior_only: bool = True) -> np.ndarray:
    """Load vector integral(f * phi_i) for a closed-form field f(x1, x2)."""
    pts = quadrature_points(mesh)
    values = f(pts[..., 0], pts[..., 1])
    weighted = mesh.signed_areas()[:, None] * _QUAD_WEIGHTS[None, :] * values  # (C, Q)
    local = weighted @ _QUAD_BARY  # (C, 3)
    load = np.bincount(mesh.cells.ravel(), weights=local.ravel(), minlength=mesh.num_vertices)
    return load[mesh.interior] if interior_only else load


def interpolate_p1(mesh: Mesh2D, f: Field) -> np.ndarray:
    """Vertex values of f over all vertices."""
    return np.asarray(f(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)


def extend_by_zero(mesh: Mesh2D, interior_values: np.ndarray) -> np.ndarray:
    full = np.zeros(mesh.num_vertices)
    full[mesh.interior] = interior_values
    return full


def l2_error_p1(mesh: Mesh2D, interior_values: np.ndarray, exact: Field) -> float:
    """||y_h - y||_{L2(D)} for a discrete P1 state (zero on the boundary) against a closed-form y."""
    full = extend_by_zero(mesh, interior_values)
    pts = quadrature_points(mesh)
    discrete = np.einsum("qa,ca->cq", _QUAD_BARY, full[mesh.cells])
    diff = discrete - exact(pts[..., 0], pts[..., 1])
    weighted = mesh.signed_areas()[:, None] * _QUAD_WEIGHTS[None, :] * diff**2
    return float(np.sqrt(weighted.sum()))
