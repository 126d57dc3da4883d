"""
Pipeline stages. Each takes the ExperimentState and returns the keys it sets.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .analysis import (
    build_manifest,
    build_summary,
    error_statistics,
    fit_rate,
    run_replications,
    write_errors_csv,
    write_frame,
    write_json,
    write_reference_csv,
)
from .analysis.reports import software_version
from .analytic import (
    OptimalityExampleSpec,
    check_exp_moment_inequality,
    check_hilbert_sum_tail,
    dimension_demo_finite,
    dimension_demo_infinite,
    eps_grid_for,
    lognormal_violation_evidence,
    optimality_example_errors,
    optimality_gap_constant,
    optimality_tail_table,
)
from .control import GradientOracle, LQProblem
from .errors import ReportIOError
from .solvers import reference_objective, solve_reference, solve_saa
from .state import ExperimentState
from .stochastic import derive_seed, draw

logger = logging.getLogger(__name__)


def prepare(state: ExperimentState) -> Dict[str, Any]:
    """Create the output directory and, for PDE kinds, the discrete problem."""
    config = state["config"]
    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportIOError(f"Cannot create output directory {out_dir}: {exc}") from exc

    update: Dict[str, Any] = {"out_dir": out_dir, "seeds": {"base_seed": config.base_seed}, "files": []}
    if config.problem is not None:
        logger.info(
            f"Preparing {config.kind}: n={config.problem.n}, alpha={config.problem.alpha}, "
            f"diffusion={config.problem.diffusion}, scale={config.scale}"
        )
        problem = LQProblem(config.problem)
        update["problem"] = problem
        update["oracle"] = GradientOracle(problem) if config.problem.diffusion == "scalar" else None
    else:
        logger.info(f"Preparing analytic experiment {config.kind}")
    return update


def solve_reference_stage(state: ExperimentState) -> Dict[str, Any]:
    config, problem, oracle = state["config"], state["problem"], state.get("oracle")
    result = solve_reference(problem, config.reference, config.solver, oracle)
    objective = reference_objective(problem, config.reference, oracle)
    return {"reference": result, "reference_gradient": objective.gradient(result.values)}


def replicate(state: ExperimentState) -> Dict[str, Any]:
    config = state["config"]
    report = run_replications(
        state["problem"],
        state["reference"],
        state["reference_gradient"],
        N_grid=config.N_grid,
        R=config.replications,
        base_seed=config.base_seed,
        options=config.solver,
        threads=config.threads,
        sigma_tau_samples=config.sigma_tau_samples,
        oracle=state.get("oracle"),
    )
    seeds = dict(state.get("seeds", {}))
    seeds["replications"] = "derive_seed(base_seed, N, replication)"
    seeds["sigma_tau"] = derive_seed(config.base_seed, 0, 0)
    return {"report": report, "seeds": seeds}


def solve_once(state: ExperimentState) -> Dict[str, Any]:
    config, problem = state["config"], state["problem"]
    N = config.solve_once.N
    seed = derive_seed(config.base_seed, N, 1)
    samples = draw(problem.spec.distribution, N, seed)
    result = solve_saa(problem, samples, config.solver, state.get("oracle"))
    logger.info(
        f"Solved SAA problem with N={N}: kkt_residual={result.kkt_residual:.2e}, "
        f"iterations={result.iterations}, wall_time={result.wall_time:.2f}s"
    )
    seeds = dict(state.get("seeds", {}))
    seeds["samples"] = seed
    return {"solution": result, "seeds": seeds}


def _optimality(config) -> Dict[str, Any]:
    spec = config.optimality
    per_N, tail_rows = [], []
    for i, N in enumerate(spec.N_grid):
        seed = derive_seed(config.base_seed, N, i)
        errors = optimality_example_errors(
            OptimalityExampleSpec(alpha=spec.alpha, N=N, replications=spec.replications, seed=seed)
        )
        stats = error_statistics(errors)
        stats["scaled_chi2_mean"] = float(np.mean((spec.alpha * errors) ** 2 * N))
        per_N.append({"N": N, **stats})
        tail_rows.extend(
            optimality_tail_table(errors, spec.alpha, N, eps_grid_for(spec.alpha, N, spec.eps_multiples))
        )
    results: Dict[str, Any] = {
        "per_N": per_N,
        "tail_table": tail_rows,
        "gap": optimality_gap_constant(),
        "bound_dominates_exact": all(row["bound"] >= row["exact"] for row in tail_rows),
    }
    if len(spec.N_grid) >= 2:
        results["fit_mean_error"] = fit_rate(spec.N_grid, [row["mean_error"] for row in per_N])
    return {"analytic": results, "tables": {"tail_table": tail_rows, "error_statistics": per_N}}


def _dimension(config) -> Dict[str, Any]:
    spec = config.dimension
    finite = dimension_demo_finite(spec.n_dim, spec.sigma_sq, spec.eps, spec.trials, spec.seed)
    infinite = dimension_demo_infinite(spec.k_trunc, spec.decay, spec.eps_infinite, spec.delta, spec.trials, spec.seed)
    return {"analytic": {"finite": finite, "infinite": infinite}, "tables": {"finite_exceedance": finite["rows"]}}


def _concentration(config) -> Dict[str, Any]:
    spec = config.concentration
    exp_moment = check_exp_moment_inequality(spec.s, spec.lambda_grid, spec.exp_trials, spec.seed)
    hilbert = check_hilbert_sum_tail(spec.dim, spec.N, spec.sum_trials, spec.seed)
    return {
        "analytic": {"exp_moment": exp_moment, "hilbert_sum": hilbert},
        "tables": {"exp_moment": exp_moment["rows"], "hilbert_sum": hilbert["rows"]},
    }


def _lognormal(config) -> Dict[str, Any]:
    evidence = lognormal_violation_evidence(config.lognormal)
    rows: List[Dict[str, Any]] = []
    for row in evidence["tau_rows"]:
        for count, value, contrast in zip(row["sample_counts"], row["log_estimates"], row["contrast_log_estimates"]):
            rows.append({"tau": row["tau"], "samples": count, "log_estimate": value, "contrast_log_estimate": contrast})
    return {"analytic": evidence, "tables": {"exp_moment_estimates": rows}}


ANALYTIC_RUNNERS = {
    "optimality5": _optimality,
    "lognormal61": _lognormal,
    "dimension8": _dimension,
    "bounds3": _concentration,
}


def analytic(state: ExperimentState) -> Dict[str, Any]:
    config = state["config"]
    logger.info(f"Running analytic experiment {config.kind}")
    return ANALYTIC_RUNNERS[config.kind](config)


def write_artifacts(state: ExperimentState) -> Dict[str, Any]:
    config, out_dir = state["config"], state["out_dir"]
    resolved = config.dump()
    files: List[str] = []

    def _add(path: Path) -> None:
        files.append(path.name)

    extra: Dict[str, Any] = {}
    if state.get("report") is not None:
        report = state["report"]
        _add(write_errors_csv(report, out_dir / "errors.csv"))
        statistics = report.summary()
        reference = state["reference"]
        extra["reference"] = {
            "kkt_residual": reference.kkt_residual,
            "iterations": reference.iterations,
            "cg_iterations": reference.cg_iterations,
            "wall_time": reference.wall_time,
        }
        _add(write_reference_csv(reference.u, out_dir / "reference_u.csv"))
    elif state.get("solution") is not None:
        solution = state["solution"]
        _add(write_reference_csv(solution.u, out_dir / "solution_u.csv"))
        statistics = {
            "N": solution.N,
            "seed": solution.seed,
            "method": solution.method,
            "kkt_residual": solution.kkt_residual,
            "iterations": solution.iterations,
            "cg_iterations": solution.cg_iterations,
            "wall_time": solution.wall_time,
            "residual_history": solution.history,
        }
        _add(write_json(statistics, out_dir / "solver.json"))
    else:
        statistics = state.get("analytic", {})
        for stem, rows in state.get("tables", {}).items():
            _add(write_frame(pd.DataFrame(rows), out_dir / f"{stem}.csv"))

    if config.kind != "solve-once":
        _add(write_json(build_summary(resolved, statistics, extra), out_dir / "summary.json"))

    manifest = build_manifest(resolved, state.get("seeds", {}), files + ["manifest.json"])
    _add(write_json(manifest, out_dir / "manifest.json"))
    logger.info(f"Artifacts for {config.kind} written to {out_dir} (version {software_version()})")
    return {"files": files}
