"""
Deterministic solvers for SAA and reference problems.

Non-smooth case Psi = gamma ||.||_L1 + indicator of [a, b]: semismooth Newton on
the normal map R(q) = q + grad F_1(P(q)), starting from q = 0.
Smooth case Psi = 0: inexact Newton-CG on grad F_1(u) + alpha u = 0.

All residual norms are L2(D) norms of P0 functions.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
import scipy.sparse.linalg as spla
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .control import (
    GradientOracle,
    LQProblem,
    LQProblemSpec,
    SampleAverageObjective,
    SmoothObjective,
    atom_grid,
    build_objective,
)
from .errors import ConfigError, ConvergenceError, NotPositiveDefiniteError
from .fem import P0Function
from .stochastic import SampleSet

logger = logging.getLogger(__name__)


class ProxSpec(BaseModel):
    """alpha/2 u^2 + gamma |u| + indicator of [lower, upper]; None means unbounded."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(gt=0)
    gamma: float = Field(default=0.0, ge=0)
    lower: Optional[float] = None
    upper: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "ProxSpec":
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError(f"Prox bounds must satisfy lower < upper, got [{self.lower}, {self.upper}]")
        return self

    @classmethod
    def from_problem(cls, spec: LQProblemSpec) -> "ProxSpec":
        return cls(alpha=spec.alpha, gamma=spec.gamma, lower=spec.lower, upper=spec.upper)

    @property
    def a(self) -> float:
        return -math.inf if self.lower is None else self.lower

    @property
    def b(self) -> float:
        return math.inf if self.upper is None else self.upper

    @property
    def smooth(self) -> bool:
        return self.gamma == 0 and self.lower is None and self.upper is None


class SolverOptions(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=50, ge=1)
    cg_rtol: float = Field(default=1e-12, gt=0)
    cg_max_iter: int = Field(default=2000, ge=1)
    max_halvings: int = Field(default=20, ge=0)


class ExactMoments(BaseModel):
    """Reference from closed-form parameter moments (scalar diffusion only)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["exact_moments"] = "exact_moments"


class AtomGrid(BaseModel):
    """Reference from the equally weighted k x k atom grid over the parameter box."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["atom_grid"] = "atom_grid"
    k: int = Field(ge=1)


ReferenceStrategy = Annotated[Union[ExactMoments, AtomGrid], Field(discriminator="kind")]


@dataclass
class SAAResult:
    u: P0Function
    kkt_residual: float
    iterations: int
    cg_iterations: int
    wall_time: float
    N: int
    seed: Optional[int] = None
    method: str = ""
    history: List[float] = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return self.u.values


def _values(q) -> np.ndarray:
    return q.values if isinstance(q, P0Function) else np.asarray(q, dtype=float)


def prox_values(q: np.ndarray, spec: ProxSpec) -> np.ndarray:
    shrunk = np.sign(q) * np.maximum(np.abs(q) - spec.gamma, 0.0) / spec.alpha
    return np.clip(shrunk, spec.a, spec.b)


def prox(q, spec: ProxSpec):
    """Cellwise clamp(sign(q) max(|q| - gamma, 0) / alpha, a, b); returns the type it was given."""
    if isinstance(q, P0Function):
        return P0Function(q.mesh, prox_values(q.values, spec))
    return prox_values(np.asarray(q, dtype=float), spec)


def inactive_set(q: np.ndarray, spec: ProxSpec) -> np.ndarray:
    """Cells where the prox has slope 1/alpha. Kinks and bound hits count as active."""
    shrunk = np.sign(q) * (np.abs(q) - spec.gamma) / spec.alpha
    return (np.abs(q) > spec.gamma) & (shrunk > spec.a) & (shrunk < spec.b)


def _l2(problem: LQProblem, values: np.ndarray) -> float:
    return problem.l2(values)


def _residual(objective: SmoothObjective, q: np.ndarray, spec: ProxSpec) -> np.ndarray:
    return q + objective.gradient(prox_values(q, spec))


def normal_map_residual(problem: LQProblem, q, samples, prox_spec: Optional[ProxSpec] = None, objective=None) -> P0Function:
    """R(q) = q + grad F_{1,N}(P(q)), the alpha term excluded from the gradient."""
    prox_spec = prox_spec or ProxSpec.from_problem(problem.spec)
    objective = objective or build_objective(problem, samples)
    return P0Function(problem.mesh, _residual(objective, _values(q), prox_spec))


def objective_value(problem: LQProblem, objective: SmoothObjective, u: np.ndarray, prox_spec: ProxSpec) -> float:
    """f(u) = F_1(u) + alpha/2 ||u||^2 + gamma ||u||_L1 for feasible u."""
    l1 = problem.area * float(np.abs(u).sum())
    return objective.value(u) + 0.5 * prox_spec.alpha * _l2(problem, u) ** 2 + prox_spec.gamma * l1


class _CGCounter:
    def __init__(self):
        self.count = 0

    def __call__(self, _):
        self.count += 1


def _cg(operator: spla.LinearOperator, rhs: np.ndarray, rtol: float, maxiter: int, counter: _CGCounter) -> np.ndarray:
    before = counter.count
    x, info = spla.cg(operator, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, callback=counter)
    if info < 0:
        raise NotPositiveDefiniteError("CG breakdown in Newton system", counter.count - before)
    if info > 0:
        logger.warning(f"CG stopped after {info} iterations above rtol {rtol:.1e}")
    return x


def _semismooth_newton(
    problem: LQProblem,
    objective: SmoothObjective,
    prox_spec: ProxSpec,
    options: SolverOptions,
) -> SAAResult:
    start = time.perf_counter()
    alpha = prox_spec.alpha
    dim = problem.num_controls
    counter = _CGCounter()

    q = np.zeros(dim)
    residual = _residual(objective, q, prox_spec)
    norm = _l2(problem, residual)
    history = [norm]

    iteration = 0
    while norm > options.tol:
        if iteration >= options.max_iter:
            logger.warning(f"Semismooth Newton stopped at residual {norm:.3e} after {iteration} iterations")
            raise ConvergenceError(
                f"Semismooth Newton did not reach tol {options.tol:.1e} in {options.max_iter} iterations",
                history,
            )
        iteration += 1

        inactive = inactive_set(q, prox_spec)
        idx = np.flatnonzero(inactive)
        du = np.zeros(dim)
        if idx.size:

            def reduced(x: np.ndarray) -> np.ndarray:
                full = np.zeros(dim)
                full[idx] = x
                return alpha * x + objective.hessvec(full)[idx]

            operator = spla.LinearOperator((idx.size, idx.size), matvec=reduced, dtype=float)
            du[idx] = _cg(operator, -residual[idx], options.cg_rtol, options.cg_max_iter, counter)

        hdu = objective.hessvec(du) if idx.size else np.zeros(dim)
        dq = np.where(inactive, alpha * du, -residual - hdu)

        step = 1.0
        for _ in range(options.max_halvings + 1):
            trial = q + step * dq
            trial_residual = _residual(objective, trial, prox_spec)
            trial_norm = _l2(problem, trial_residual)
            if trial_norm < norm or trial_norm <= options.tol:
                break
            step *= 0.5
        else:
            logger.warning(f"Step halving exhausted at residual {norm:.3e}; taking the last trial step")
        if step < 1.0:
            logger.warning(f"Semismooth Newton iteration {iteration}: step halved to {step:g}")

        q, residual, norm = trial, trial_residual, trial_norm
        history.append(norm)
        logger.debug(f"SSN iteration {iteration}: |I|={idx.size}, residual={norm:.3e}")

    u = prox_values(q, prox_spec)
    return SAAResult(
        u=P0Function(problem.mesh, u),
        kkt_residual=norm,
        iterations=iteration,
        cg_iterations=counter.count,
        wall_time=time.perf_counter() - start,
        N=0,
        method="semismooth_newton",
        history=history,
    )


def _newton_cg(
    problem: LQProblem,
    objective: SmoothObjective,
    alpha: float,
    options: SolverOptions,
) -> SAAResult:
    start = time.perf_counter()
    dim = problem.num_controls
    counter = _CGCounter()
    operator = spla.LinearOperator((dim, dim), matvec=lambda v: objective.hessvec(v) + alpha * v, dtype=float)

    u = np.zeros(dim)
    gradient = objective.gradient(u) + alpha * u
    norm = _l2(problem, gradient)
    history = [norm]

    iteration = 0
    while norm > options.tol:
        if iteration >= options.max_iter:
            logger.warning(f"Newton-CG stopped at gradient norm {norm:.3e} after {iteration} iterations")
            raise ConvergenceError(
                f"Newton-CG did not reach tol {options.tol:.1e} in {options.max_iter} iterations",
                history,
            )
        iteration += 1
        forcing = max(min(0.5, math.sqrt(norm)), options.cg_rtol)
        u = u + _cg(operator, -gradient, forcing, options.cg_max_iter, counter)
        gradient = objective.gradient(u) + alpha * u
        norm = _l2(problem, gradient)
        history.append(norm)
        logger.debug(f"Newton-CG iteration {iteration}: forcing={forcing:.2e}, gradient={norm:.3e}")

    return SAAResult(
        u=P0Function(problem.mesh, u),
        kkt_residual=norm,
        iterations=iteration,
        cg_iterations=counter.count,
        wall_time=time.perf_counter() - start,
        N=0,
        method="newton_cg",
        history=history,
    )


def _sample_info(samples):
    if isinstance(samples, SampleSet):
        return samples.N, samples.seed
    return np.atleast_2d(np.asarray(samples)).shape[0], None


def semismooth_newton(
    problem: LQProblem,
    samples,
    options: Optional[SolverOptions] = None,
    objective: Optional[SmoothObjective] = None,
    prox_spec: Optional[ProxSpec] = None,
) -> SAAResult:
    prox_spec = prox_spec or ProxSpec.from_problem(problem.spec)
    if prox_spec.smooth:
        return newton_cg(problem, samples, options, objective)
    objective = objective or build_objective(problem, samples)
    result = _semismooth_newton(problem, objective, prox_spec, options or SolverOptions())
    result.N, result.seed = _sample_info(samples)
    return result


def newton_cg(
    problem: LQProblem,
    samples,
    options: Optional[SolverOptions] = None,
    objective: Optional[SmoothObjective] = None,
) -> SAAResult:
    if not problem.spec.smooth:
        raise ValueError("Newton-CG needs gamma = 0 and no bounds")
    objective = objective or build_objective(problem, samples)
    result = _newton_cg(problem, objective, problem.alpha, options or SolverOptions())
    result.N, result.seed = _sample_info(samples)
    return result


def solve_saa(
    problem: LQProblem,
    samples,
    options: Optional[SolverOptions] = None,
    oracle: Optional[GradientOracle] = None,
    objective: Optional[SmoothObjective] = None,
) -> SAAResult:
    """Solve the SAA problem for one sample set, choosing the method from Psi."""
    if objective is None:
        objective = build_objective(problem, samples, oracle)
    if problem.spec.smooth:
        return newton_cg(problem, samples, options, objective)
    return semismooth_newton(problem, samples, options, objective)


def reference_objective(problem: LQProblem, strategy, oracle: Optional[GradientOracle] = None):
    if isinstance(strategy, ExactMoments):
        if problem.spec.diffusion != "scalar":
            raise ConfigError("ExactMoments reference needs the scalar diffusion model")
        return (oracle or GradientOracle(problem)).exact()
    atoms = atom_grid(problem.spec.distribution, strategy.k).atoms
    if problem.spec.diffusion == "scalar":
        return (oracle or GradientOracle(problem)).empirical(atoms)
    return SampleAverageObjective(problem, atoms)


def solve_reference(
    problem: LQProblem,
    strategy: Union[ExactMoments, AtomGrid],
    options: Optional[SolverOptions] = None,
    oracle: Optional[GradientOracle] = None,
) -> SAAResult:
    """u* for the true law (exact moments) or its k^2-atom surrogate, at the SAA tolerance."""
    objective = reference_objective(problem, strategy, oracle)
    options = options or SolverOptions()
    logger.info(f"Solving reference problem with {strategy.kind} (n={problem.spec.n})")
    if problem.spec.smooth:
        result = _newton_cg(problem, objective, problem.alpha, options)
    else:
        result = _semismooth_newton(problem, objective, ProxSpec.from_problem(problem.spec), options)
    result.N = strategy.k**2 if isinstance(strategy, AtomGrid) else 0
    logger.info(
        f"Reference solved: kkt_residual={result.kkt_residual:.2e}, iterations={result.iterations}, "
        f"cg={result.cg_iterations}"
    )
    return result
