"""
Parameter distributions, seeded i.i.d. sampling and the moments needed for exact gradients.

Distributions are pydantic models discriminated by `kind`, so they can be
written directly in an experiment config file. Sampling uses numpy's
counter-based Philox generator: a draw is a pure function of
(distribution, N, seed).
"""

import math
from dataclasses import dataclass
from typing import Annotated, Dict, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate, special

# Standardized truncation window beyond which the normal density is below double precision
_Z_CUTOFF = 38.0


class _Distribution(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def dim(self) -> int:
        return 1

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    def box(self) -> List[Tuple[float, float]]:
        """Bounding box of the support, one (lo, hi) pair per coordinate."""
        raise NotImplementedError


class TruncatedNormal(_Distribution):
    kind: Literal["truncated_normal"] = "truncated_normal"
    lo: float
    hi: float
    mean_: float = Field(alias="mean")
    sd: float

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _check(self) -> "TruncatedNormal":
        if not self.lo < self.hi:
            raise ValueError(f"Truncation interval must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if not self.sd > 0:
            raise ValueError(f"Standard deviation must be positive, got {self.sd}")
        if not self.mass > 0:
            raise ValueError("Truncation interval carries no probability mass")
        return self

    @property
    def alpha(self) -> float:
        return (self.lo - self.mean_) / self.sd

    @property
    def beta(self) -> float:
        return (self.hi - self.mean_) / self.sd

    @property
    def mass(self) -> float:
        return float(special.ndtr(self.beta) - special.ndtr(self.alpha))

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        # Inverse CDF on the truncated quantile range
        lower, upper = special.ndtr(self.alpha), special.ndtr(self.beta)
        p = lower + rng.random(N) * (upper - lower)
        x = self.mean_ + self.sd * special.ndtri(p)
        return np.clip(x, self.lo, self.hi)[:, None]

    def mean(self) -> np.ndarray:
        return np.array([self.expect(lambda x: x)])

    def box(self) -> List[Tuple[float, float]]:
        return [(self.lo, self.hi)]

    def expect(self, g, epsabs: float = 1e-12) -> float:
        """E[g(xi)] by adaptive quadrature in the standardized variable."""
        a = max(self.alpha, -_Z_CUTOFF)
        b = min(self.beta, _Z_CUTOFF)
        density = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        value, _ = integrate.quad(
            lambda z: g(self.mean_ + self.sd * z) * density(z),
            a,
            b,
            epsabs=epsabs,
            epsrel=1e-13,
            limit=200,
        )
        return value / self.mass

    def exp_moment(self, t: float) -> float:
        """E[exp(t xi)] in closed form."""
        shifted = special.ndtr(self.beta - t * self.sd) - special.ndtr(self.alpha - t * self.sd)
        return float(math.exp(t * self.mean_ + 0.5 * (t * self.sd) ** 2) * shifted / self.mass)


class Uniform(_Distribution):
    kind: Literal["uniform"] = "uniform"
    lo: float
    hi: float

    @model_validator(mode="after")
    def _check(self) -> "Uniform":
        if not self.lo < self.hi:
            raise ValueError(f"Uniform bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        return self

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=N)[:, None]

    def mean(self) -> np.ndarray:
        return np.array([0.5 * (self.lo + self.hi)])

    def second_moment(self) -> float:
        return (self.hi - self.lo) ** 2 / 12.0 + (0.5 * (self.lo + self.hi)) ** 2

    def box(self) -> List[Tuple[float, float]]:
        return [(self.lo, self.hi)]


class StandardNormal(_Distribution):
    kind: Literal["standard_normal"] = "standard_normal"

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return rng.standard_normal(N)[:, None]

    def mean(self) -> np.ndarray:
        return np.zeros(1)

    def exp_moment(self, t: float) -> float:
        return math.exp(0.5 * t * t)

    def box(self) -> List[Tuple[float, float]]:
        return [(-math.inf, math.inf)]


class PointMass(_Distribution):
    kind: Literal["point_mass"] = "point_mass"
    value: float

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return np.full((N, 1), self.value)

    def mean(self) -> np.ndarray:
        return np.array([self.value])

    def second_moment(self) -> float:
        return self.value**2

    def box(self) -> List[Tuple[float, float]]:
        return [(self.value, self.value)]


class DiscreteGrid2D(_Distribution):
    """Equally weighted atoms on a k x k tensor grid (endpoints included) of a 2D box."""

    kind: Literal["discrete_grid"] = "discrete_grid"
    bounds: Tuple[Tuple[float, float], Tuple[float, float]]
    k: int

    @model_validator(mode="after")
    def _check(self) -> "DiscreteGrid2D":
        if self.k < 1:
            raise ValueError(f"Grid needs k >= 1 points per axis, got {self.k}")
        for lo, hi in self.bounds:
            if not lo <= hi:
                raise ValueError(f"Grid bounds must satisfy lo <= hi, got [{lo}, {hi}]")
        return self

    @property
    def dim(self) -> int:
        return 2

    def axis_points(self) -> List[np.ndarray]:
        if self.k == 1:
            return [np.array([0.5 * (lo + hi)]) for lo, hi in self.bounds]
        return [np.linspace(lo, hi, self.k) for lo, hi in self.bounds]

    @property
    def atoms(self) -> np.ndarray:
        first, second = self.axis_points()
        a, b = np.meshgrid(first, second, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.k * self.k, 1.0 / (self.k * self.k))

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return self.atoms[rng.integers(0, self.k * self.k, size=N)]

    def mean(self) -> np.ndarray:
        return self.weights @ self.atoms

    def box(self) -> List[Tuple[float, float]]:
        return [tuple(b) for b in self.bounds]


Scalar = Annotated[
    Union[TruncatedNormal, Uniform, StandardNormal, PointMass],
    Field(discriminator="kind"),
]


class Product(_Distribution):
    """Independent components, concatenated in order."""

    kind: Literal["product"] = "product"
    components: List[Scalar]

    @model_validator(mode="after")
    def _check(self) -> "Product":
        if not self.components:
            raise ValueError("Product distribution needs at least one component")
        return self

    @property
    def dim(self) -> int:
        return len(self.components)

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return np.hstack([c.sample(rng, N) for c in self.components])

    def mean(self) -> np.ndarray:
        return np.concatenate([c.mean() for c in self.components])

    def box(self) -> List[Tuple[float, float]]:
        return [c.box()[0] for c in self.components]


ParamDistribution = Annotated[
    Union[TruncatedNormal, Uniform, StandardNormal, PointMass, DiscreteGrid2D, Product],
    Field(discriminator="kind"),
]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N i.i.d. parameter draws; row i is xi^i."""

    distribution: _Distribution
    N: int
    seed: int
    samples: np.ndarray  # (N, dim)

    def __len__(self) -> int:
        return self.N

    def __iter__(self):
        return iter(self.samples)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seed(base_seed: int, *coordinates: int) -> int:
    """64-bit seed for a replication coordinate, independent across coordinates."""
    sequence = np.random.SeedSequence([int(base_seed), *map(int, coordinates)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def draw(dist: _Distribution, N: int, seed: int) -> SampleSet:
    """Draw N i.i.d. samples; identical (dist, N, seed) reproduce the samples bit-exactly."""
    if N < 1:
        raise ValueError(f"Sample size must be at least 1, got {N}")
    samples = dist.sample(make_rng(seed), N)
    return SampleSet(distribution=dist, N=N, seed=int(seed), samples=np.ascontiguousarray(samples))


def sample_set_from_array(dist: _Distribution, samples: np.ndarray, seed: int = 0) -> SampleSet:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    return SampleSet(distribution=dist, N=samples.shape[0], seed=seed, samples=samples)


def truncated_normal_inverse_moments(lo: float, hi: float, mean: float, sd: float) -> Dict[str, float]:
    """E[1/xi] and E[1/xi^2] for xi ~ TruncatedNormal(lo, hi, mean, sd)."""
    if lo <= 0:
        raise ValueError(f"Inverse moments need a positive lower bound, got lo={lo}")
    dist = TruncatedNormal(lo=lo, hi=hi, mean=mean, sd=sd)
    return {
        "m1": dist.expect(lambda x: 1.0 / x),
        "m2": dist.expect(lambda x: 1.0 / (x * x)),
    }


def discrete_grid(
    bounds: Tuple[Tuple[float, float], Tuple[float, float]] = ((3.0, 5.0), (0.5, 2.5)),
    k: int = 50,
) -> DiscreteGrid2D:
    return DiscreteGrid2D(bounds=bounds, k=k)
