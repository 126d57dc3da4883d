"""
A problem where the exponential tail bound is attained up to a constant.

min (alpha/2)||u||^2 - E<h(xi), u> with h(xi) = xi_1 phi_1 + xi_2 phi_2 for
orthonormal phi_1, phi_2 and standard Gaussian xi. Then u* = 0 and
alpha u_N* = mean(xi_1) phi_1 + mean(xi_2) phi_2, so everything is simulated
in the two coefficients and no PDE is solved.
"""

import math
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..analysis.bounds import bound_tail_pinelis
from ..analysis.statistics import exceedance
from ..stochastic import make_rng

# Draws per chunk when simulating replications
_CHUNK_DRAWS = 4_000_000


class OptimalityExampleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(default=1.0, gt=0)
    N: int = Field(default=16, ge=1)
    replications: int = Field(default=100_000, ge=1)
    seed: int = 0


def optimality_tau_sq() -> float:
    """tau^2 = 2e/(e - 1): E exp(||h(xi)||^2 / tau^2) = e for the chi-square(2) norm."""
    return 2.0 * math.e / (math.e - 1.0)


def chi2_exp_moment(tau_sq: float) -> float:
    """E exp(X / tau_sq) for X ~ chi-square(2), i.e. (1 - 2/tau_sq)^{-1}."""
    if tau_sq <= 2.0:
        raise ValueError(f"Chi-square(2) exponential moment diverges for tau_sq <= 2, got {tau_sq}")
    return 1.0 / (1.0 - 2.0 / tau_sq)


def optimality_gap_constant() -> Dict[str, float]:
    """
    3 tau^2 / 2 and the ratio of the bound's tail exponent to the exact one.

    Exact tail exponent is alpha^2 / 2, bound exponent alpha^2 / (3 tau^2);
    the ratio does not depend on alpha, N or eps.
    """
    tau_sq = optimality_tau_sq()
    exact_exponent = 0.5
    bound_exponent = 1.0 / (3.0 * tau_sq)
    return {"constant": 1.5 * tau_sq, "exponent_ratio": exact_exponent / bound_exponent}


def optimality_exact_tail(alpha: float, N: int, eps: float) -> float:
    """P(||u* - u_N*|| >= eps) = exp(-N alpha^2 eps^2 / 2)."""
    return math.exp(-N * alpha**2 * eps**2 / 2.0)


def optimality_example_errors(spec: OptimalityExampleSpec) -> np.ndarray:
    """||u* - u_N*|| for each replication, from N i.i.d. standard Gaussian pairs."""
    rng = make_rng(spec.seed)
    rows_per_chunk = max(1, _CHUNK_DRAWS // (2 * spec.N))
    errors = np.empty(spec.replications)
    start = 0
    while start < spec.replications:
        rows = min(rows_per_chunk, spec.replications - start)
        means = rng.standard_normal((rows, spec.N, 2)).mean(axis=1)
        errors[start : start + rows] = np.sqrt(np.sum(means**2, axis=1)) / spec.alpha
        start += rows
    return errors


def eps_grid_for(alpha: float, N: int, multiples: Sequence[float] = (0.5, 1.0, 1.5)) -> List[float]:
    """Error levels in units of 1 / (alpha sqrt(N))."""
    return [m / (alpha * math.sqrt(N)) for m in multiples]


def optimality_tail_table(errors: Sequence[float], alpha: float, N: int, eps_grid: Sequence[float]) -> List[Dict]:
    """Empirical vs exact tail vs tail bound (tau^2 = 2e/(e-1)) for one N."""
    tau = math.sqrt(optimality_tau_sq())
    rows = []
    for eps in eps_grid:
        stats = exceedance(errors, eps)
        exact = optimality_exact_tail(alpha, N, eps)
        se = math.sqrt(exact * (1.0 - exact) / len(errors))
        rows.append(
            {
                "N": N,
                "eps": eps,
                "empirical": stats["fraction"],
                "exact": exact,
                "standard_error": se,
                "bound": bound_tail_pinelis(alpha, tau, N, eps),
                "matches_exact": bool(abs(stats["fraction"] - exact) <= 3.0 * se),
            }
        )
    return rows
