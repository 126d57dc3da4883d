import numpy as np
import pandas as pd
import pytest

from src.analysis import (
    estimate_sigma_tau,
    read_reference_csv,
    run_replications,
    write_errors_csv,
    write_reference_csv,
)
from src.analysis.reports import ERROR_COLUMNS, build_manifest, config_digest, error_record
from src.control import GradientOracle, LQProblem, example1_spec, example2_spec
from src.errors import SolverError
from src.solvers import AtomGrid, ExactMoments, SolverOptions, reference_objective, solve_reference


def _reference(problem):
    oracle = GradientOracle(problem)
    result = solve_reference(problem, ExactMoments(), oracle=oracle)
    gradient = reference_objective(problem, ExactMoments(), oracle).gradient(result.values)
    return result, gradient, oracle


@pytest.fixture(scope="module")
def tiny_run(example1_tiny):
    reference, gradient, oracle = _reference(example1_tiny)
    report = run_replications(
        example1_tiny,
        reference,
        gradient,
        N_grid=[2, 4],
        R=3,
        base_seed=11,
        threads=1,
        sigma_tau_samples=200,
        oracle=oracle,
    )
    return reference, gradient, oracle, report


class TestRunReplications:
    def test_single_replication(self, point_mass_problem):
        reference, gradient, oracle = _reference(point_mass_problem)
        report = run_replications(
            point_mass_problem, reference, gradient, N_grid=[1], R=1, base_seed=3, sigma_tau_samples=0, oracle=oracle
        )
        assert len(report.records) == 1
        assert report.sigma_hat is None

    def test_degenerate_law_has_no_error(self, point_mass_problem):
        reference, gradient, oracle = _reference(point_mass_problem)
        report = run_replications(
            point_mass_problem, reference, gradient, N_grid=[1, 2, 4], R=2, base_seed=3, sigma_tau_samples=20, oracle=oracle
        )
        assert max(rec.error for rec in report.records) <= 1e-8

    def test_records_ordered_with_derived_seeds(self, tiny_run):
        *_, report = tiny_run
        assert [(rec.N, rec.replication) for rec in report.records] == [
            (N, r) for N in (2, 4) for r in (1, 2, 3)
        ]
        assert len({rec.seed for rec in report.records}) == 6

    def test_optimality_checks_hold(self, tiny_run):
        *_, report = tiny_run
        assert report.checks["aposteriori_violations"] == 0
        assert report.checks["gap_violations"] == 0
        assert all(rec.kkt_residual <= 1e-10 for rec in report.records)

    def test_statistics_and_bounds(self, tiny_run):
        *_, report = tiny_run
        assert [row["N"] for row in report.per_N] == [2, 4]
        assert report.tau_hat >= report.sigma_hat > 0
        assert {"bound_mean_square", "bound_luxemburg"} <= set(report.per_N[0])
        assert set(report.fits) == {"mean_error", "luxemburg"}
        summary = report.summary()
        assert summary["replications"] == 3 and summary["N_grid"] == [2, 4]

    def test_thread_count_does_not_change_results(self, example1_tiny, tiny_run):
        reference, gradient, oracle, report = tiny_run
        threaded = run_replications(
            example1_tiny,
            reference,
            gradient,
            N_grid=[2, 4],
            R=3,
            base_seed=11,
            threads=3,
            sigma_tau_samples=200,
            oracle=oracle,
        )
        assert threaded.records == report.records
        assert threaded.sigma_hat == report.sigma_hat

    def test_solver_failure_carries_coordinates(self, example1_tiny, tiny_run):
        reference, gradient, oracle, _ = tiny_run
        with pytest.raises(SolverError) as info:
            run_replications(
                example1_tiny,
                reference,
                gradient,
                N_grid=[2],
                R=1,
                base_seed=11,
                options=SolverOptions(tol=1e-30, max_iter=1),
                sigma_tau_samples=0,
                oracle=oracle,
            )
        assert info.value.coordinates == (2, 1)
        assert error_record(info.value, 3)["coordinates"] == {"N": 2, "replication": 1}


class TestReports:
    def test_errors_csv_layout(self, tmp_path, tiny_run):
        *_, report = tiny_run
        path = write_errors_csv(report, tmp_path / "errors.csv")
        frame = pd.read_csv(path, float_precision="round_trip")
        assert list(frame.columns) == ERROR_COLUMNS
        assert len(frame) == 6
        assert frame["seed"].astype("uint64").tolist() == [rec.seed for rec in report.records]
        np.testing.assert_array_equal(frame["error"].to_numpy(), [rec.error for rec in report.records])
        assert b"\r\n" not in path.read_bytes()

    def test_errors_csv_is_reproducible(self, tmp_path, tiny_run):
        *_, report = tiny_run
        first = write_errors_csv(report, tmp_path / "a.csv").read_bytes()
        second = write_errors_csv(report, tmp_path / "b.csv").read_bytes()
        assert first == second

    def test_reference_dump_round_trip(self, tmp_path, tiny_run):
        reference, *_ = tiny_run
        path = write_reference_csv(reference.u, tmp_path / "reference_u.csv")
        assert path.read_text().startswith("# n=4\n")
        loaded = read_reference_csv(path)
        assert loaded["n"] == 4
        assert list(loaded["frame"].columns) == ["cell_index", "x_center", "y_center", "u_value"]
        np.testing.assert_array_equal(loaded["frame"]["u_value"].to_numpy(), reference.values)

    def test_digest_ignores_key_order(self):
        assert config_digest({"a": 1, "b": [1, 2]}) == config_digest({"b": [1, 2], "a": 1})
        assert config_digest({"a": 1}) != config_digest({"a": 2})

    def test_manifest_lists_files_sorted(self):
        manifest = build_manifest({"kind": "example1"}, {"base_seed": 1}, ["z.csv", "a.json"])
        assert manifest["files"] == ["a.json", "z.csv"]
        assert "numpy" in manifest["packages"]


class TestSigmaTau:
    def test_degenerate_law_has_no_deviation(self, point_mass_problem):
        reference, gradient, oracle = _reference(point_mass_problem)
        params = estimate_sigma_tau(point_mass_problem, reference.values, gradient, M=50, seed=5, oracle=oracle)
        assert params["sigma_hat"] <= 1e-8
        assert params["tau_hat"] >= params["sigma_hat"]

    def test_needs_two_samples(self, example1_tiny):
        with pytest.raises(ValueError):
            estimate_sigma_tau(example1_tiny, np.zeros(example1_tiny.num_controls), np.zeros(example1_tiny.num_controls), M=1)


@pytest.mark.slow
class TestRateReproduction:
    def test_random_diffusion_rates(self):
        problem = LQProblem(example1_spec())
        reference, gradient, oracle = _reference(problem)
        report = run_replications(
            problem,
            reference,
            gradient,
            N_grid=[2**i for i in range(1, 9)],
            R=50,
            base_seed=20210402,
            threads=4,
            sigma_tau_samples=10_000,
            oracle=oracle,
        )
        assert -0.65 <= report.fits["mean_error"]["rate"] <= -0.35
        assert -0.65 <= report.fits["luxemburg"]["rate"] <= -0.35
        assert report.checks["aposteriori_violations"] == 0
        assert report.checks["mse_bound_ok"]

    def test_two_block_rates(self):
        problem = LQProblem(example2_spec())
        strategy = AtomGrid(k=10)
        reference = solve_reference(problem, strategy)
        gradient = reference_objective(problem, strategy).gradient(reference.values)
        report = run_replications(
            problem,
            reference,
            gradient,
            N_grid=[2**i for i in range(1, 8)],
            R=50,
            base_seed=20210402,
            threads=4,
            sigma_tau_samples=0,
        )
        assert -0.65 <= report.fits["mean_error"]["rate"] <= -0.35
        assert report.checks["aposteriori_violations"] == 0
