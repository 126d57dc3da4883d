import json

import pytest

from src.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from src.config import ExperimentConfig, apply_overrides, load_config
from src.errors import ConfigError
from src.solvers import AtomGrid, ExactMoments


def _read_json(path):
    return json.loads(path.read_text())


class TestConfig:
    def test_overrides_parse_json_values(self):
        document = apply_overrides({}, ["solver.tol=1e-9", "N_grid=[2,4]", "kind=example1"])
        assert document == {"solver": {"tol": 1e-9}, "N_grid": [2, 4], "kind": "example1"}

    def test_malformed_override(self):
        with pytest.raises(ConfigError):
            apply_overrides({}, ["solver.tol"])

    def test_unknown_key_rejected(self, isolated_settings):
        with pytest.raises(ConfigError):
            load_config(None, ["solver.tolerance=1e-9"], kind="example1")

    def test_defaults_resolve_by_kind_and_scale(self, isolated_settings):
        first = load_config(None, [], kind="example1").resolve(isolated_settings)
        assert first.problem.n == 32
        assert first.reference == ExactMoments()
        assert first.N_grid == [2, 4, 8, 16, 32, 64, 128, 256]

        second = load_config(None, [], kind="example2", scale="paper").resolve(isolated_settings)
        assert second.problem.n == 64
        assert second.reference == AtomGrid(k=50)
        assert second.N_grid[-1] == 128

    def test_nested_problem_override_starts_from_defaults(self, isolated_settings):
        config = load_config(None, ["problem.n=8"], kind="example1")
        assert config.problem.n == 8
        assert config.problem.gamma == 5.5e-4

    def test_explicit_values_win_over_overrides(self, isolated_settings):
        config = load_config(None, ["threads=2"], kind="bounds3", threads=5)
        assert config.threads == 5

    def test_resolved_dump_round_trips(self, isolated_settings):
        resolved = load_config(None, [], kind="example2").resolve(isolated_settings)
        again = ExperimentConfig.model_validate(resolved.dump()).resolve(isolated_settings)
        assert again.dump() == resolved.dump()


class TestRun:
    def test_concentration_run_writes_artifacts(self, tmp_path, isolated_settings):
        out = tmp_path / "bounds"
        code = main(
            [
                "run",
                "bounds3",
                "--out",
                str(out),
                "--set",
                "concentration.exp_trials=20000",
                "--set",
                "concentration.sum_trials=5000",
            ]
        )
        assert code == EXIT_OK
        assert {p.name for p in out.iterdir()} == {"exp_moment.csv", "hilbert_sum.csv", "summary.json", "manifest.json"}
        summary = _read_json(out / "summary.json")
        assert summary["statistics"]["exp_moment"]["violations"] == 0
        manifest = _read_json(out / "manifest.json")
        assert manifest["config_digest"] == summary["config_digest"]
        assert manifest["files"] == sorted(p.name for p in out.iterdir())

    def test_optimality_run(self, tmp_path, isolated_settings):
        out = tmp_path / "opt"
        code = main(
            ["run", "optimality5", "--out", str(out), "--set", "optimality.replications=5000", "--set", "optimality.N_grid=[4,16]"]
        )
        assert code == EXIT_OK
        statistics = _read_json(out / "summary.json")["statistics"]
        assert statistics["bound_dominates_exact"]
        assert abs(statistics["gap"]["constant"] - 4.7459) < 1e-4
        assert [row["N"] for row in statistics["per_N"]] == [4, 16]

    def test_example1_run_is_thread_independent(self, tmp_path, isolated_settings):
        common = [
            "--set", "problem.n=4",
            "--set", "N_grid=[2,4]",
            "--set", "replications=2",
            "--set", "sigma_tau_samples=50",
            "--seed", "7",
        ]
        assert main(["run", "example1", "--out", str(tmp_path / "a"), "--threads", "1", *common]) == EXIT_OK
        assert main(["run", "example1", "--out", str(tmp_path / "b"), "--threads", "2", *common]) == EXIT_OK

        a, b = tmp_path / "a", tmp_path / "b"
        assert {p.name for p in a.iterdir()} == {"errors.csv", "reference_u.csv", "summary.json", "manifest.json"}
        assert (a / "errors.csv").read_bytes() == (b / "errors.csv").read_bytes()
        assert (a / "reference_u.csv").read_text().startswith("# n=4\n")

        summary = _read_json(a / "summary.json")
        assert summary["statistics"]["checks"]["aposteriori_violations"] == 0
        rebuilt = ExperimentConfig.model_validate(summary["config"])
        assert rebuilt.dump() == summary["config"]

    def test_solve_once(self, tmp_path, isolated_settings):
        out = tmp_path / "once"
        code = main(["run", "solve-once", "--out", str(out), "--set", "problem.n=4", "--set", "solve_once.N=3"])
        assert code == EXIT_OK
        assert {p.name for p in out.iterdir()} == {"solution_u.csv", "solver.json", "manifest.json"}
        solver = _read_json(out / "solver.json")
        assert solver["N"] == 3 and solver["kkt_residual"] <= 1e-10


class TestExitCodes:
    def test_invalid_config_exits_2(self, tmp_path, isolated_settings):
        out = tmp_path / "bad"
        assert main(["run", "example1", "--out", str(out), "--set", "replications=0"]) == EXIT_CONFIG
        record = _read_json(out / "error.json")
        assert record["exit_code"] == EXIT_CONFIG
        assert record["error"] == "ConfigError"

    def test_missing_kind_exits_2(self, tmp_path, isolated_settings):
        assert main(["run", "--out", str(tmp_path / "none")]) == EXIT_CONFIG

    def test_missing_config_file_exits_4(self, tmp_path, isolated_settings):
        out = tmp_path / "io"
        assert main(["run", "--config", str(tmp_path / "absent.json"), "--out", str(out)]) == EXIT_IO
        assert _read_json(out / "error.json")["exit_code"] == EXIT_IO

    def test_config_file_is_read(self, tmp_path, isolated_settings):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"kind": "dimension8", "dimension": {"trials": 2000}}))
        out = tmp_path / "dim"
        assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
        assert (out / "finite_exceedance.csv").exists()
