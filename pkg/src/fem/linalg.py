"""
Sparse SPD matrices and their solvers.

Direct solves use a sparse Cholesky factorization (CHOLMOD via scikit-sparse
when it is installed, otherwise SuperLU in symmetric mode with diagonal
pivoting, whose U-diagonal is checked for positivity). Systems larger than
DIRECT_SOLVE_LIMIT unknowns fall back to Jacobi-preconditioned CG.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from ..errors import NotPositiveDefiniteError, SolverError

DIRECT_SOLVE_LIMIT = 200_000
CG_RTOL = 1e-12
SYMMETRY_RTOL = 1e-12

try:
    from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky as _cholmod_cholesky

    _HAS_CHOLMOD = True
except ImportError:
    _HAS_CHOLMOD = False

SolveMethod = Literal["auto", "cholesky", "cg"]


@dataclass(frozen=True, eq=False)
class SparseSpd:
    """A symmetric positive definite matrix in CSR layout."""

    matrix: sps.csr_matrix
    symmetric: bool

    @classmethod
    def from_matrix(cls, matrix, rtol: float = SYMMETRY_RTOL) -> "SparseSpd":
        csr = sps.csr_matrix(matrix, dtype=float)
        if csr.shape[0] != csr.shape[1]:
            raise ValueError(f"SPD matrix must be square, got shape {csr.shape}")
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(matrix=csr, symmetric=is_symmetric(csr, rtol))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def is_symmetric(matrix: sps.spmatrix, rtol: float = SYMMETRY_RTOL) -> bool:
    """max|A - A^T| <= rtol * max|A|."""
    if matrix.nnz == 0:
        return True
    scale = abs(matrix).max()
    diff = abs(matrix - matrix.T)
    return diff.nnz == 0 or diff.max() <= rtol * scale


class SpdFactor:
    """
    Reusable solver for one SPD matrix.

    Immutable after construction; `solve` may be called concurrently.
    """

    def __init__(
        self,
        spd: SparseSpd,
        method: SolveMethod = "auto",
        cg_rtol: float = CG_RTOL,
    ):
        if not spd.symmetric:
            raise ValueError("Matrix is not symmetric within tolerance")
        self.spd = spd
        self.cg_rtol = cg_rtol
        if method == "auto":
            method = "cholesky" if spd.dimension <= DIRECT_SOLVE_LIMIT else "cg"
        self.method = method
        self._backend = None
        self._jacobi: Optional[sps.dia_matrix] = None

        if spd.dimension == 0:
            return
        if method == "cholesky":
            self._backend = self._factorize(spd.matrix)
        else:
            diag = spd.matrix.diagonal()
            bad = np.flatnonzero(diag <= 0)
            if bad.size:
                raise NotPositiveDefiniteError("Nonpositive diagonal entry", int(bad[0]))
            self._jacobi = sps.diags(1.0 / diag)

    @staticmethod
    def _factorize(matrix: sps.csr_matrix):
        if _HAS_CHOLMOD:
            try:
                return _cholmod_cholesky(matrix.tocsc())
            except CholmodNotPositiveDefiniteError as exc:
                column = getattr(exc, "column", -1)
                raise NotPositiveDefiniteError("Cholesky breakdown", int(column)) from exc

        lu = spla.splu(
            matrix.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
        pivots = lu.U.diagonal()
        bad = np.flatnonzero(~(pivots > 0))
        if bad.size:
            raise NotPositiveDefiniteError("Cholesky breakdown (nonpositive pivot)", int(bad[0]))
        return lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.spd.dimension:
            raise ValueError(
                f"Right-hand side has {rhs.shape[0]} rows, matrix dimension is {self.spd.dimension}"
            )
        if self.spd.dimension == 0:
            return np.zeros_like(rhs)
        if self.method == "cholesky":
            return self._backend(rhs) if _HAS_CHOLMOD else self._backend.solve(rhs)
        if rhs.ndim == 1:
            return self._cg(rhs)
        return np.column_stack([self._cg(rhs[:, k]) for k in range(rhs.shape[1])])

    def _cg(self, rhs: np.ndarray) -> np.ndarray:
        if not np.any(rhs):
            return np.zeros_like(rhs)
        iterations = 0

        def _count(_):
            nonlocal iterations
            iterations += 1

        x, info = spla.cg(
            self.spd.matrix,
            rhs,
            rtol=self.cg_rtol,
            atol=0.0,
            maxiter=10 * self.spd.dimension,
            M=self._jacobi,
            callback=_count,
        )
        if info != 0:
            raise NotPositiveDefiniteError("CG breakdown or stagnation", iterations)
        return x


def solve_spd(spd: SparseSpd, rhs: np.ndarray, method: SolveMethod = "auto") -> np.ndarray:
    """Solve spd @ x = rhs once; raises SolverError when |Ax - b| exceeds 1e-10 * (1 + |b|)."""
    x = SpdFactor(spd, method=method).solve(rhs)
    residual = np.linalg.norm(spd.matrix @ x - rhs)
    if residual > 1e-10 * (1.0 + np.linalg.norm(rhs)):
        raise SolverError(f"SPD solve residual {residual:.3e} above tolerance (dimension {spd.dimension})")
    return x
