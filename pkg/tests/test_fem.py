import numpy as np
import pytest
import scipy.sparse as sps

from src.analysis.statistics import fit_rate
from src.errors import NotPositiveDefiniteError, SolverError
from src.fem import (
    P0Function,
    SparseSpd,
    SpdFactor,
    assemble_control_load,
    assemble_load,
    assemble_mass_p0,
    assemble_mass_p1,
    assemble_stiffness,
    build_unit_square_mesh,
    inner_l2,
    l2_error_p1,
    norms,
    solve_spd,
)


def _bump(x1, x2):
    return np.sin(np.pi * x1) * np.sin(np.pi * x2)


def _bump_source(x1, x2):
    return 2.0 * np.pi**2 * _bump(x1, x2)


class TestMesh:
    def test_counts_for_n2(self):
        mesh = build_unit_square_mesh(2)
        assert mesh.num_vertices == 9
        assert mesh.num_cells == 8
        assert mesh.num_interior == 1
        assert mesh.h == 0.5

    def test_cells_are_counter_clockwise_with_equal_area(self):
        mesh = build_unit_square_mesh(5)
        np.testing.assert_allclose(mesh.signed_areas(), mesh.cell_area, rtol=1e-12)

    @pytest.mark.parametrize("n", [0, -3, 2.5, True])
    def test_rejects_invalid_size(self, n):
        with pytest.raises(ValueError):
            build_unit_square_mesh(n)


class TestAssembly:
    def test_masses_integrate_one(self):
        mesh = build_unit_square_mesh(6)
        assert assemble_mass_p1(mesh).matrix.sum() == pytest.approx(1.0, rel=1e-12)
        assert assemble_mass_p0(mesh).sum() == pytest.approx(1.0, rel=1e-12)
        assert assemble_control_load(mesh, interior_only=False).sum() == pytest.approx(1.0, rel=1e-12)

    def test_stiffness_is_symmetric_and_scales_linearly(self):
        mesh = build_unit_square_mesh(6)
        unit = assemble_stiffness(mesh, 1.0)
        doubled = assemble_stiffness(mesh, 2.0)
        assert unit.symmetric
        np.testing.assert_allclose(doubled.toarray(), 2.0 * unit.toarray(), rtol=1e-15, atol=0.0)

    def test_rejects_nonpositive_coefficient(self):
        mesh = build_unit_square_mesh(2)
        kappa = np.ones(mesh.num_cells)
        kappa[3] = 0.0
        with pytest.raises(ValueError):
            assemble_stiffness(mesh, kappa)

    def test_manufactured_solution_converges_at_second_order(self):
        sizes = (8, 16, 32)
        errors = []
        for n in sizes:
            mesh = build_unit_square_mesh(n)
            y = solve_spd(assemble_stiffness(mesh, 1.0), assemble_load(mesh, _bump_source))
            errors.append(l2_error_p1(mesh, y, _bump))
        slope = fit_rate([1.0 / n for n in sizes], errors)["rate"]
        assert abs(slope - 2.0) <= 0.15


class TestLinalg:
    def test_direct_solve_matches_dense(self):
        mesh = build_unit_square_mesh(4)
        spd = assemble_stiffness(mesh, 1.0)
        rhs = np.arange(1.0, spd.dimension + 1.0)
        x = SpdFactor(spd).solve(rhs)
        np.testing.assert_allclose(spd.toarray() @ x, rhs, rtol=1e-10)

    def test_cg_agrees_with_cholesky(self):
        mesh = build_unit_square_mesh(6)
        spd = assemble_stiffness(mesh, 1.0)
        rhs = np.ones(spd.dimension)
        direct = SpdFactor(spd, method="cholesky").solve(rhs)
        iterative = SpdFactor(spd, method="cg").solve(rhs)
        np.testing.assert_allclose(iterative, direct, rtol=1e-9)

    def test_indefinite_matrix_reports_breakdown(self):
        spd = SparseSpd.from_matrix(sps.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]])))
        with pytest.raises(NotPositiveDefiniteError):
            SpdFactor(spd, method="cholesky")

    def test_inaccurate_solve_raises(self, monkeypatch):
        mesh = build_unit_square_mesh(4)
        spd = assemble_stiffness(mesh, 1.0)
        monkeypatch.setattr(SpdFactor, "solve", lambda self, rhs: np.zeros_like(rhs))
        with pytest.raises(SolverError):
            solve_spd(spd, np.ones(spd.dimension))

    def test_negative_diagonal_rejected_for_cg(self):
        spd = SparseSpd.from_matrix(sps.diags([-1.0, 1.0]))
        with pytest.raises(NotPositiveDefiniteError):
            SpdFactor(spd, method="cg")

    def test_nonsymmetric_matrix_rejected(self):
        spd = SparseSpd.from_matrix(sps.csr_matrix(np.array([[2.0, 1.0], [0.0, 2.0]])))
        assert not spd.symmetric
        with pytest.raises(ValueError):
            SpdFactor(spd)


class TestFunctions:
    def test_constant_norms(self):
        mesh = build_unit_square_mesh(3)
        u = P0Function(mesh, np.full(mesh.num_cells, 2.0))
        assert norms(u) == pytest.approx({"l2": 2.0, "l1": 2.0}, rel=1e-12)

    def test_wrong_length_rejected(self):
        mesh = build_unit_square_mesh(3)
        with pytest.raises(ValueError):
            P0Function(mesh, np.zeros(mesh.num_cells + 1))

    def test_inner_product_needs_same_mesh(self):
        a = build_unit_square_mesh(2)
        b = build_unit_square_mesh(3)
        with pytest.raises(ValueError):
            inner_l2(P0Function(a, np.ones(a.num_cells)), P0Function(b, np.ones(b.num_cells)))
