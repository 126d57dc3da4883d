"""
Linear-quadratic elliptic control with random coefficients.

The state equation is stored as A(xi) y = L u + g(xi), where L is the P0 -> P1
control load (entry h^2/6 per incident vertex) and A(xi) the Dirichlet-reduced
stiffness of kappa(., xi). This is the weak form of -div(kappa grad y) = u + r.
The smooth integrand is G1(u, xi) = 1/2 ||y(u, xi) - y_d||^2_{L2}; the
Tikhonov term (alpha/2)||u||^2 is added only by the saa_* wrappers.

Gradients are L2 Riesz representatives on the P0 control space, i.e. the
coefficient gradient divided by the cell area, so they can be compared with
controls directly. Reductions over samples run serially in a fixed order:
distinct sample values in lexicographic order, weighted by multiplicity.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Optional, Protocol, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .fem import (
    Mesh2D,
    P0Function,
    P1Function,
    SparseSpd,
    SpdFactor,
    assemble_control_load,
    assemble_load,
    assemble_mass_p1,
    build_unit_square_mesh,
    interpolate_p1,
    restrict_to_interior,
    unit_stiffness_local,
)
from .fem.assembly import _scatter
from .stochastic import (
    DiscreteGrid2D,
    ParamDistribution,
    PointMass,
    Product,
    SampleSet,
    StandardNormal,
    TruncatedNormal,
    Uniform,
    discrete_grid,
    truncated_normal_inverse_moments,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, P0Function]
Scale = Literal["desk", "paper"]


def target_exp_sin_sin(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    return np.exp(2.0 * x1) * np.sin(2.0 * np.pi * x1) * np.sin(2.0 * np.pi * x2) / 6.0


def rhs_exp_sin(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    return np.exp(2.0 * x1) * np.sin(2.0 * np.pi * x2)


TARGETS = {
    "exp_sin_sin": target_exp_sin_sin,
    "zero": lambda x1, x2: np.zeros_like(x1),
}


class LQProblemSpec(BaseModel):
    """One instance of the random-coefficient control problem."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(ge=1)
    alpha: float = Field(gt=0)
    gamma: float = Field(default=0.0, ge=0)
    lower: Optional[float] = None
    upper: Optional[float] = None
    target: Literal["exp_sin_sin", "zero"] = "exp_sin_sin"
    diffusion: Literal["scalar", "two_block"] = "scalar"
    rhs: Literal["zero", "separable"] = "zero"
    distribution: ParamDistribution

    @model_validator(mode="after")
    def _check(self) -> "LQProblemSpec":
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError(f"Control bounds must satisfy lower < upper, got [{self.lower}, {self.upper}]")
        dim = self.distribution.dim
        if self.diffusion == "two_block":
            if self.n % 2:
                raise ValueError(f"Two-block diffusion needs an even mesh size, got n={self.n}")
            if dim < 2:
                raise ValueError("Two-block diffusion needs a two-dimensional parameter")
        if self.rhs == "separable" and dim < 2:
            raise ValueError("Separable right-hand side needs a two-dimensional parameter")
        return self

    @property
    def bounded(self) -> bool:
        return self.lower is not None or self.upper is not None

    @property
    def smooth(self) -> bool:
        """Psi = 0: no L1 term and no bounds."""
        return self.gamma == 0 and not self.bounded


def example1_spec(scale: Scale = "desk", n: Optional[int] = None) -> LQProblemSpec:
    """Scalar truncated-normal diffusion, separable random source, L1 + box regularizer."""
    return LQProblemSpec(
        n=n or (32 if scale == "desk" else 256),
        alpha=1e-3,
        gamma=5.5e-4,
        lower=-1.0,
        upper=1.0,
        diffusion="scalar",
        rhs="separable",
        distribution=Product(
            components=[
                TruncatedNormal(lo=0.5, hi=3.5, mean=2.0, sd=0.25),
                Uniform(lo=-1.0, hi=1.0),
            ]
        ),
    )


def example2_spec(scale: Scale = "desk", n: Optional[int] = None, k: Optional[int] = None) -> LQProblemSpec:
    """Two-block diffusion on a discrete uniform grid of [3, 5] x [0.5, 2.5], Psi = 0."""
    return LQProblemSpec(
        n=n or (16 if scale == "desk" else 64),
        alpha=1e-4,
        diffusion="two_block",
        rhs="zero",
        distribution=discrete_grid(((3.0, 5.0), (0.5, 2.5)), k or (10 if scale == "desk" else 50)),
    )


@dataclass(frozen=True)
class StateSystem:
    """A(xi)^{-1} = scale * factor^{-1}, plus the random load g(xi)."""

    factor: SpdFactor
    scale: float
    load: Optional[np.ndarray]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self.factor.solve(rhs)
        return x if self.scale == 1.0 else self.scale * x


class LQProblem:
    """Discrete operators of one LQProblemSpec (mesh, stiffness parts, loads, target)."""

    def __init__(self, spec: LQProblemSpec, target_values: Optional[np.ndarray] = None):
        self.spec = spec
        self.mesh: Mesh2D = build_unit_square_mesh(spec.n)
        self.alpha = spec.alpha
        self.area = self.mesh.cell_area

        self.control_load = assemble_control_load(self.mesh)
        self.control_load_t = self.control_load.T.tocsr()
        self.mass_full = assemble_mass_p1(self.mesh).matrix
        self.mass = restrict_to_interior(self.mass_full, self.mesh)

        if target_values is None:
            target_values = interpolate_p1(self.mesh, TARGETS[spec.target])
        self.target = np.asarray(target_values, dtype=float)
        self.target_load = (self.mass_full @ self.target)[self.mesh.interior]
        self.target_sq = float(self.target @ (self.mass_full @ self.target))

        self.source_load = (
            assemble_load(self.mesh, rhs_exp_sin) if spec.rhs == "separable" else None
        )

        local = unit_stiffness_local(self.mesh)
        if spec.diffusion == "scalar":
            self.upper_cells = np.ones(self.mesh.num_cells, dtype=bool)
            self.stiffness_parts = [restrict_to_interior(_scatter(self.mesh, local), self.mesh)]
        else:
            # kappa = xi_1 on {x2 > 1/2}, xi_2 on {x2 < 1/2}
            self.upper_cells = self.mesh.centroids[:, 1] > 0.5
            self.stiffness_parts = [
                restrict_to_interior(_scatter(self.mesh, local * mask[:, None, None]), self.mesh)
                for mask in (self.upper_cells, ~self.upper_cells)
            ]

    @property
    def num_controls(self) -> int:
        return self.mesh.num_cells

    @cached_property
    def unit_factor(self) -> SpdFactor:
        return SpdFactor(SparseSpd.from_matrix(self.stiffness_parts[0]))

    def kappa(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.spec.diffusion == "scalar":
            return np.full(self.mesh.num_cells, xi[0])
        return np.where(self.upper_cells, xi[0], xi[1])

    def system(self, xi: np.ndarray) -> StateSystem:
        xi = np.asarray(xi, dtype=float)
        load = xi[1] * self.source_load if self.source_load is not None else None
        if self.spec.diffusion == "scalar":
            if not xi[0] > 0:
                raise ValueError(f"Diffusion coefficient must be positive, got {xi[0]}")
            return StateSystem(factor=self.unit_factor, scale=1.0 / xi[0], load=load)
        if not (xi[0] > 0 and xi[1] > 0):
            raise ValueError(f"Diffusion coefficients must be positive, got {xi[:2]}")
        stiffness = xi[0] * self.stiffness_parts[0] + xi[1] * self.stiffness_parts[1]
        return StateSystem(factor=SpdFactor(SparseSpd.from_matrix(stiffness)), scale=1.0, load=load)

    # Per-sample kernels on coefficient arrays

    def state(self, u: np.ndarray, system: StateSystem) -> np.ndarray:
        rhs = self.control_load @ u
        if system.load is not None:
            rhs = rhs + system.load
        return system.solve(rhs)

    def tracking(self, y: np.ndarray) -> float:
        return 0.5 * (y @ (self.mass @ y) - 2.0 * y @ self.target_load + self.target_sq)

    def adjoint(self, y: np.ndarray, system: StateSystem) -> np.ndarray:
        """p with A(xi) p = M (y - y_d); A is symmetric so the state factorization is reused."""
        return system.solve(self.mass @ y - self.target_load)

    def riesz(self, load_dual: np.ndarray) -> np.ndarray:
        """L2 representative of the control functional v -> <load_dual, L v>."""
        return (self.control_load_t @ load_dual) / self.area

    def sample_value(self, u: np.ndarray, system: StateSystem) -> float:
        return self.tracking(self.state(u, system))

    def sample_gradient(self, u: np.ndarray, system: StateSystem) -> np.ndarray:
        y = self.state(u, system)
        return self.riesz(self.adjoint(y, system))

    def sample_hessvec(self, v: np.ndarray, system: StateSystem) -> np.ndarray:
        w = system.solve(self.control_load @ v)
        return self.riesz(system.solve(self.mass @ w))

    def l2(self, u: np.ndarray) -> float:
        return float(math.sqrt(self.area * np.dot(u, u)))


class SmoothObjective(Protocol):
    """F_{1,N}: value, L2 gradient and Hessian-vector product, without the alpha term."""

    def value(self, u: np.ndarray) -> float: ...

    def gradient(self, u: np.ndarray) -> np.ndarray: ...

    def hessvec(self, v: np.ndarray) -> np.ndarray: ...


class SampleAverageObjective:
    """Empirical mean of G1 over a sample array, one state system per distinct sample."""

    def __init__(self, problem: LQProblem, samples: np.ndarray):
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        if samples.shape[0] == 0:
            raise ValueError("Sample set must be nonempty")
        self.problem = problem
        self.N = samples.shape[0]
        distinct, counts = np.unique(samples, axis=0, return_counts=True)
        self.distinct = distinct
        self.weights = counts / self.N
        self.systems = [problem.system(xi) for xi in distinct]

    def value(self, u: np.ndarray) -> float:
        total = 0.0
        for w, system in zip(self.weights, self.systems):
            total += w * self.problem.sample_value(u, system)
        return total

    def gradient(self, u: np.ndarray) -> np.ndarray:
        p = self.problem
        load = p.control_load @ u
        dual = np.zeros(p.mesh.num_interior)
        for w, system in zip(self.weights, self.systems):
            rhs = load if system.load is None else load + system.load
            y = system.solve(rhs)
            dual += w * p.adjoint(y, system)
        return p.riesz(dual)

    def hessvec(self, v: np.ndarray) -> np.ndarray:
        p = self.problem
        load = p.control_load @ v
        dual = np.zeros(p.mesh.num_interior)
        for w, system in zip(self.weights, self.systems):
            dual += w * system.solve(p.mass @ system.solve(load))
        return p.riesz(dual)

    def sample_gradients(self, u: np.ndarray) -> np.ndarray:
        """Gradients of G1 at each distinct sample, shape (distinct, C)."""
        return np.array([self.problem.sample_gradient(u, s) for s in self.systems])


@dataclass(frozen=True)
class Moments:
    """Moments of the scalar-diffusion parameter (xi_1, xi_2) entering G1."""

    inv1: float  # E[1/xi_1]
    inv2: float  # E[1/xi_1^2]
    cross: float  # E[xi_2/xi_1^2]
    cross_inv1: float  # E[xi_2/xi_1]
    cross_sq: float  # E[xi_2^2/xi_1^2]

    @classmethod
    def empirical(cls, samples: np.ndarray) -> "Moments":
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        xi1 = samples[:, 0]
        xi2 = samples[:, 1] if samples.shape[1] > 1 else np.zeros_like(xi1)
        return cls(
            inv1=float(np.mean(1.0 / xi1)),
            inv2=float(np.mean(1.0 / xi1**2)),
            cross=float(np.mean(xi2 / xi1**2)),
            cross_inv1=float(np.mean(xi2 / xi1)),
            cross_sq=float(np.mean(xi2**2 / xi1**2)),
        )

    @classmethod
    def exact(cls, distribution) -> "Moments":
        if isinstance(distribution, Product):
            first = distribution.components[0]
            second = distribution.components[1] if distribution.dim > 1 else PointMass(value=0.0)
        else:
            first, second = distribution, PointMass(value=0.0)
        inv1, inv2 = inverse_moments(first)
        mean2, sq2 = scalar_moments(second)
        return cls(inv1=inv1, inv2=inv2, cross=mean2 * inv2, cross_inv1=mean2 * inv1, cross_sq=sq2 * inv2)


def inverse_moments(dist) -> tuple:
    """(E[1/xi], E[1/xi^2]) for a positive scalar law."""
    if isinstance(dist, TruncatedNormal):
        m = truncated_normal_inverse_moments(dist.lo, dist.hi, dist.mean_, dist.sd)
        return m["m1"], m["m2"]
    if isinstance(dist, PointMass) and dist.value > 0:
        return 1.0 / dist.value, 1.0 / dist.value**2
    if isinstance(dist, Uniform) and dist.lo > 0:
        width = dist.hi - dist.lo
        return math.log(dist.hi / dist.lo) / width, 1.0 / (dist.lo * dist.hi)
    raise ValueError(f"Inverse moments are not available for {dist!r}")


def scalar_moments(dist) -> tuple:
    """(E[xi], E[xi^2]) of a scalar law."""
    if isinstance(dist, (Uniform, PointMass)):
        return float(dist.mean()[0]), dist.second_moment()
    if isinstance(dist, StandardNormal):
        return 0.0, 1.0
    if isinstance(dist, TruncatedNormal):
        return dist.expect(lambda x: x), dist.expect(lambda x: x * x)
    raise ValueError(f"Moments are not available for {dist!r}")


class GradientOracle:
    """
    Scalar-diffusion shortcut: with A(xi) = xi_1 A_1 every per-sample quantity
    is a moment-weighted combination of K_0 u = A_1^{-1} L u, h_0 = A_1^{-1} g_0
    and y_d, so gradients and Hessian products cost two solves regardless of N.
    """

    def __init__(self, problem: LQProblem):
        if problem.spec.diffusion != "scalar":
            raise ValueError("The moment oracle needs the scalar diffusion model")
        self.problem = problem
        self.factor = problem.unit_factor
        p = problem
        self.w_target = p.riesz(self.factor.solve(p.target_load))  # K_0^* y_d
        if p.source_load is not None:
            self.h0 = self.factor.solve(p.source_load)
            self.w_source = p.riesz(self.factor.solve(p.mass @ self.h0))  # K_0^* h_0
            self.h0_sq = float(self.h0 @ (p.mass @ self.h0))
            self.h0_target = float(self.h0 @ p.target_load)
        else:
            self.h0 = np.zeros(p.mesh.num_interior)
            self.w_source = np.zeros(p.num_controls)
            self.h0_sq = 0.0
            self.h0_target = 0.0

    def k0(self, u: np.ndarray) -> np.ndarray:
        return self.factor.solve(self.problem.control_load @ u)

    def gram(self, u: np.ndarray) -> np.ndarray:
        """K_0^* K_0 u (two solves)."""
        p = self.problem
        return p.riesz(self.factor.solve(p.mass @ self.k0(u)))

    def objective(self, moments: Moments) -> "MomentObjective":
        return MomentObjective(self, moments)

    def empirical(self, samples: np.ndarray) -> "MomentObjective":
        return self.objective(Moments.empirical(samples))

    def exact(self) -> "MomentObjective":
        return self.objective(Moments.exact(self.problem.spec.distribution))

    def deviation_norms(self, u: np.ndarray, samples: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """||grad G1(u, xi^i) - reference||_{L2} per sample, via a 4x4 Gram matrix."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        xi1 = samples[:, 0]
        xi2 = samples[:, 1] if samples.shape[1] > 1 else np.zeros_like(xi1)
        basis = np.stack([self.gram(u), self.w_source, self.w_target, reference])
        gram = self.problem.area * basis @ basis.T
        coeffs = np.column_stack([1.0 / xi1**2, xi2 / xi1**2, -1.0 / xi1, -np.ones_like(xi1)])
        squares = np.einsum("ij,jk,ik->i", coeffs, gram, coeffs)
        return np.sqrt(np.maximum(squares, 0.0))


class MomentObjective:
    """F_1 evaluated through a Moments record (exact or empirical)."""

    def __init__(self, oracle: GradientOracle, moments: Moments):
        self.oracle = oracle
        self.moments = moments

    def value(self, u: np.ndarray) -> float:
        o, m, p = self.oracle, self.moments, self.oracle.problem
        y0 = o.k0(u)
        return 0.5 * (
            m.inv2 * float(y0 @ (p.mass @ y0))
            + 2.0 * m.cross * float(y0 @ (p.mass @ o.h0))
            + m.cross_sq * o.h0_sq
            - 2.0 * m.inv1 * float(y0 @ p.target_load)
            - 2.0 * m.cross_inv1 * o.h0_target
            + p.target_sq
        )

    def gradient(self, u: np.ndarray) -> np.ndarray:
        o, m = self.oracle, self.moments
        return m.inv2 * o.gram(u) + m.cross * o.w_source - m.inv1 * o.w_target

    def hessvec(self, v: np.ndarray) -> np.ndarray:
        return self.moments.inv2 * self.oracle.gram(v)


def build_objective(problem: LQProblem, samples: Union[SampleSet, np.ndarray], oracle: Optional[GradientOracle] = None):
    """Moment shortcut for scalar diffusion, per-sample averaging otherwise."""
    array = samples.samples if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if problem.spec.diffusion == "scalar":
        return (oracle or GradientOracle(problem)).empirical(array)
    return SampleAverageObjective(problem, array)


def gradient_deviation_norms(
    problem: LQProblem,
    u: np.ndarray,
    samples: np.ndarray,
    reference: np.ndarray,
    oracle: Optional[GradientOracle] = None,
) -> np.ndarray:
    """||grad G1(u, xi^i) - reference|| for every sample row; repeated rows are solved once."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if problem.spec.diffusion == "scalar":
        return (oracle or GradientOracle(problem)).deviation_norms(u, samples, reference)
    distinct, inverse = np.unique(samples, axis=0, return_inverse=True)
    gradients = SampleAverageObjective(problem, distinct).sample_gradients(u)
    norms = np.sqrt(problem.area * np.sum((gradients - reference) ** 2, axis=1))
    return norms[np.ravel(inverse)]


# Public operations on discrete functions


def _values(u: ArrayLike) -> np.ndarray:
    return u.values if isinstance(u, P0Function) else np.asarray(u, dtype=float)


def _sample_array(samples: Union[SampleSet, np.ndarray, Sequence]) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return samples.samples
    return np.atleast_2d(np.asarray(samples, dtype=float))


def solve_state(problem: LQProblem, u: ArrayLike, xi: Sequence[float]) -> P1Function:
    y = problem.state(_values(u), problem.system(np.asarray(xi, dtype=float)))
    return P1Function(problem.mesh, y)


def sample_gradient_smooth(problem: LQProblem, u: ArrayLike, xi: Sequence[float]) -> P0Function:
    """grad_u G1(u, xi); excludes alpha u."""
    g = problem.sample_gradient(_values(u), problem.system(np.asarray(xi, dtype=float)))
    return P0Function(problem.mesh, g)


def saa_gradient_smooth(problem: LQProblem, u: ArrayLike, samples) -> P0Function:
    """(1/N) sum grad G1(u, xi^i) + alpha u."""
    values = _values(u)
    g = SampleAverageObjective(problem, _sample_array(samples)).gradient(values)
    return P0Function(problem.mesh, g + problem.alpha * values)


def saa_value(problem: LQProblem, u: ArrayLike, samples) -> float:
    """(1/N) sum G1(u, xi^i) + (alpha/2) ||u||^2."""
    values = _values(u)
    smooth = SampleAverageObjective(problem, _sample_array(samples)).value(values)
    return smooth + 0.5 * problem.alpha * problem.l2(values) ** 2


def saa_hessvec(problem: LQProblem, v: ArrayLike, samples, alpha: Optional[float] = None) -> P0Function:
    """(1/N) sum K(xi^i)^* K(xi^i) v + alpha v; pass alpha=0 for the Hessian of F_1 alone."""
    values = _values(v)
    shift = problem.alpha if alpha is None else alpha
    hv = SampleAverageObjective(problem, _sample_array(samples)).hessvec(values)
    return P0Function(problem.mesh, hv + shift * values)


def true_gradient_example1(oracle: GradientOracle, u: ArrayLike, samples=None) -> P0Function:
    """
    grad F_1(u) from exact moments, or its empirical mean when samples are given.
    Excludes alpha u. Two SPD solves per call.
    """
    objective = oracle.exact() if samples is None else oracle.empirical(_sample_array(samples))
    return P0Function(oracle.problem.mesh, objective.gradient(_values(u)))


HESSIAN_DIMENSION_LIMIT = 1024


def f1_hessian_min_eig(problem: LQProblem, samples, shift: float = 0.0, restrict_to_range: bool = True) -> float:
    """
    Smallest eigenvalue of the L2 Hessian of F_1 (plus shift * I), assembled column by column.

    P0 controls outnumber interior P1 states, so the Gram operator always has a
    kernel of dimension 2n^2 - rank(L). With restrict_to_range the eigenvalue is
    taken on the orthogonal complement of that kernel, which is where refinement
    drives it towards zero.
    """
    dim = problem.num_controls
    if dim > HESSIAN_DIMENSION_LIMIT:
        raise ValueError(f"Dense Hessian limited to {HESSIAN_DIMENSION_LIMIT} controls, got {dim}")
    array = _sample_array(samples)
    hessian = np.empty((dim, dim))
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        hessian[:, j] = saa_hessvec(problem, e, array, alpha=0.0).values
    hessian = 0.5 * (hessian + hessian.T)
    eigenvalues = np.linalg.eigvalsh(hessian)  # ascending
    if restrict_to_range:
        rank = int(np.linalg.matrix_rank(problem.control_load.toarray()))
        value = eigenvalues[dim - rank]
    else:
        value = max(eigenvalues[0], 0.0)
    return float(value + shift)


def atom_grid(distribution, k: int) -> DiscreteGrid2D:
    """k x k grid over the support box of a two-parameter law (the law itself if already a grid)."""
    if isinstance(distribution, DiscreteGrid2D):
        return DiscreteGrid2D(bounds=distribution.bounds, k=k)
    box = distribution.box()
    if len(box) != 2 or not all(math.isfinite(v) for pair in box for v in pair):
        raise ValueError("Atom grids need a bounded two-parameter distribution")
    return DiscreteGrid2D(bounds=(tuple(box[0]), tuple(box[1])), k=k)
