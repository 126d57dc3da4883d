"""Structured right-triangle meshes of the unit square."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """
    Triangulation of [0, 1]^2 with n cells per axis.

    Vertices are numbered row-major (x fastest). Every grid square is split
    along its lower-left to upper-right diagonal into a lower and an upper
    triangle, stored in that order, both counter-clockwise.
    """

    n: int
    vertices: np.ndarray  # (V, 2)
    cells: np.ndarray  # (2n^2, 3)
    boundary_mask: np.ndarray  # (V,)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def cell_area(self) -> float:
        return 0.5 * self.h * self.h

    @cached_property
    def interior(self) -> np.ndarray:
        """Indices of the free (non-Dirichlet) vertices, ascending."""
        return np.flatnonzero(~self.boundary_mask)

    @property
    def num_interior(self) -> int:
        return self.interior.shape[0]

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.cells].mean(axis=1)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.cells]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def build_unit_square_mesh(n: int) -> Mesh2D:
    """Build the structured mesh with n cells per axis (2n^2 triangles)."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"Mesh size must be a positive integer, got {n!r}")
    n = int(n)

    ticks = np.linspace(0.0, 1.0, n + 1)
    xs, ys = np.meshgrid(ticks, ticks)  # row j holds y = ticks[j]
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    j, i = np.divmod(np.arange(n * n), n)
    v0 = j * (n + 1) + i
    v1 = v0 + 1
    v2 = v0 + n + 2
    v3 = v0 + n + 1
    lower = np.column_stack([v0, v1, v2])
    upper = np.column_stack([v0, v2, v3])
    cells = np.stack([lower, upper], axis=1).reshape(-1, 3)

    idx_i, idx_j = np.arange(n + 1)[None, :], np.arange(n + 1)[:, None]
    boundary = (idx_i == 0) | (idx_i == n) | (idx_j == 0) | (idx_j == n)

    return Mesh2D(n=n, vertices=vertices, cells=cells, boundary_mask=boundary.ravel())
