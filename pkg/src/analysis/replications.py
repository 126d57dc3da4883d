"""
Replication experiments: R independent SAA solves for every N in a grid,
compared against one reference solution.

Tasks run on a thread pool; the report is reduced in (N, replication) order,
so it does not depend on the number of threads.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..control import GradientOracle, LQProblem, build_objective
from ..errors import SolverError
from ..solvers import ProxSpec, SAAResult, SolverOptions, objective_value, solve_saa
from ..stochastic import derive_seed, draw
from .bounds import bound_luxemburg, bound_mean_square
from .statistics import (
    error_statistics,
    estimate_sigma_tau,
    exceedance_grid,
    exceedance_table,
    fit_rate,
)

logger = logging.getLogger(__name__)

MSE_SLACK = 1.5
APOSTERIORI_SLACK = 1e-8


@dataclass(frozen=True)
class ReplicationRecord:
    N: int
    replication: int
    seed: int
    error: float
    kkt_residual: float
    iterations: int
    aposteriori_ok: bool
    gap_ok: bool


@dataclass
class TailExperimentReport:
    N_grid: List[int]
    R: int
    base_seed: int
    alpha: float
    records: List[ReplicationRecord]
    per_N: List[Dict[str, float]] = field(default_factory=list)
    fits: Dict[str, Dict[str, float]] = field(default_factory=dict)
    sigma_hat: Optional[float] = None
    tau_hat: Optional[float] = None
    exceedance: List[Dict[str, float]] = field(default_factory=list)
    checks: Dict[str, object] = field(default_factory=dict)

    def errors_by_N(self) -> Dict[int, np.ndarray]:
        return {
            N: np.array([rec.error for rec in self.records if rec.N == N]) for N in self.N_grid
        }

    def summary(self) -> Dict[str, object]:
        return {
            "N_grid": self.N_grid,
            "replications": self.R,
            "base_seed": self.base_seed,
            "alpha": self.alpha,
            "sigma_hat": self.sigma_hat,
            "tau_hat": self.tau_hat,
            "per_N": self.per_N,
            "fits": self.fits,
            "exceedance": self.exceedance,
            "checks": self.checks,
        }


def _replicate(
    problem: LQProblem,
    reference: SAAResult,
    reference_gradient: np.ndarray,
    N: int,
    replication: int,
    base_seed: int,
    options: SolverOptions,
    oracle: Optional[GradientOracle],
) -> ReplicationRecord:
    seed = derive_seed(base_seed, N, replication)
    samples = draw(problem.spec.distribution, N, seed)
    try:
        objective = build_objective(problem, samples, oracle)
        result = solve_saa(problem, samples, options, objective=objective)
    except SolverError as exc:
        raise exc.with_coordinates(N, replication)

    u_star = reference.values
    u_N = result.values
    error = problem.l2(u_star - u_N)

    # alpha ||u* - u_N|| <= ||grad F_N(u*) - grad F(u*)||
    deviation = problem.l2(objective.gradient(u_star) - reference_gradient)
    aposteriori_ok = problem.alpha * error <= deviation + APOSTERIORI_SLACK

    # u_N minimizes f_N
    prox_spec = ProxSpec.from_problem(problem.spec)
    f_at_u_N = objective_value(problem, objective, u_N, prox_spec)
    f_at_u_star = objective_value(problem, objective, u_star, prox_spec)
    gap_ok = f_at_u_N <= f_at_u_star + 1e-12 * (1.0 + abs(f_at_u_star))

    return ReplicationRecord(
        N=N,
        replication=replication,
        seed=seed,
        error=error,
        kkt_residual=result.kkt_residual,
        iterations=result.iterations,
        aposteriori_ok=bool(aposteriori_ok),
        gap_ok=bool(gap_ok),
    )


def run_replications(
    problem: LQProblem,
    reference: SAAResult,
    reference_gradient: np.ndarray,
    N_grid: Sequence[int],
    R: int,
    base_seed: int,
    options: Optional[SolverOptions] = None,
    threads: int = 1,
    sigma_tau_samples: int = 10_000,
    oracle: Optional[GradientOracle] = None,
) -> TailExperimentReport:
    """
    Solve the SAA problem for every (N, r) and collect error statistics.

    Args:
        problem: Problem operators
        reference: Reference solution u*
        reference_gradient: grad F_1(u*) under the reference law (alpha term excluded)
        N_grid: Sample sizes
        R: Replications per sample size
        base_seed: Root seed; replication (N, r) uses derive_seed(base_seed, N, r)
        options: Solver options shared by every replication
        threads: Worker threads
        sigma_tau_samples: Fresh draws for sigma_hat / tau_hat (0 skips the estimate)
        oracle: Shared moment oracle for scalar diffusion problems

    Returns:
        TailExperimentReport with per-replication records and statistics
    """
    if R < 1 or not N_grid:
        raise ValueError("run_replications needs R >= 1 and a nonempty N grid")
    options = options or SolverOptions()
    N_grid = [int(N) for N in N_grid]
    if problem.spec.diffusion == "scalar" and oracle is None:
        oracle = GradientOracle(problem)

    tasks = [(N, r) for N in N_grid for r in range(1, R + 1)]
    logger.info(f"Running {len(tasks)} replications on {threads} thread(s): N_grid={N_grid}, R={R}")

    args = (problem, reference, reference_gradient)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [
            pool.submit(_replicate, *args, N, r, base_seed, options, oracle) for N, r in tasks
        ]
        records = []
        try:
            for future in futures:
                records.append(future.result())
        except BaseException:
            for pending in futures:
                pending.cancel()
            raise

    report = TailExperimentReport(
        N_grid=N_grid, R=R, base_seed=base_seed, alpha=problem.alpha, records=records
    )
    errors = report.errors_by_N()

    for N in N_grid:
        stats = {"N": N, **error_statistics(errors[N])}
        report.per_N.append(stats)
        logger.info(
            f"N={N}: mean error {stats['mean_error']:.4e}, "
            f"luxemburg {stats['luxemburg']:.4e}, mse {stats['mse']:.4e}"
        )

    if len(N_grid) >= 2:
        for key in ("mean_error", "luxemburg"):
            values = [row[key] for row in report.per_N]
            if all(v > 0 for v in values):
                report.fits[key] = fit_rate(N_grid, values)

    report.checks["aposteriori_violations"] = sum(not rec.aposteriori_ok for rec in records)
    report.checks["gap_violations"] = sum(not rec.gap_ok for rec in records)

    if sigma_tau_samples:
        params = estimate_sigma_tau(
            problem,
            reference.values,
            reference_gradient,
            M=sigma_tau_samples,
            seed=derive_seed(base_seed, 0, 0),
            oracle=oracle,
        )
        report.sigma_hat, report.tau_hat = params["sigma_hat"], params["tau_hat"]
        report.checks["mse_bound_ok"] = all(
            row["mse"] <= bound_mean_square(problem.alpha, MSE_SLACK * report.sigma_hat, row["N"])
            for row in report.per_N
        )
        for row in report.per_N:
            row["bound_mean_square"] = bound_mean_square(problem.alpha, report.sigma_hat, row["N"])
            row["bound_luxemburg"] = bound_luxemburg(problem.alpha, report.tau_hat, row["N"])
        pooled = np.concatenate(list(errors.values()))
        if np.any(pooled > 0):
            report.exceedance = exceedance_table(
                errors, exceedance_grid(pooled), problem.alpha, report.tau_hat
            )
            report.checks["exceedance_violations"] = sum(row["violated"] for row in report.exceedance)

    return report
