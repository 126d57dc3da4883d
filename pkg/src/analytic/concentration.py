"""Direct Monte Carlo checks of the exponential moment and Hilbert-sum tail inequalities."""

import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from ..analysis.bounds import bound_hilbert_sum
from ..stochastic import make_rng

_CHUNK_DRAWS = 4_000_000


class ConcentrationSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    s: float = Field(default=1.0, gt=0)
    lambda_grid: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
    exp_trials: int = Field(default=1_000_000, ge=2)
    dim: int = Field(default=2, ge=1)
    N: int = Field(default=10, ge=1)
    sum_trials: int = Field(default=100_000, ge=2)
    seed: int = 0


def sub_gaussian_sigma_sq(s: float) -> float:
    """sigma^2 with E exp(X^2 / sigma^2) = e for X ~ N(0, s^2): 2 s^2 / (1 - e^{-2})."""
    return 2.0 * s**2 / (1.0 - math.exp(-2.0))


def check_exp_moment_inequality(s: float, lambda_grid: Sequence[float], trials: int, seed: int) -> Dict[str, object]:
    """
    E[exp(lambda |X|) - lambda |X|] <= exp(3 lambda^2 sigma^2 / 4) for X ~ N(0, s^2).

    A grid point is a violation when the Monte Carlo mean exceeds the bound by
    more than three standard errors.
    """
    sigma_sq = sub_gaussian_sigma_sq(s)
    x = np.abs(make_rng(seed).normal(0.0, s, size=trials))
    rows = []
    for lam in lambda_grid:
        values = np.exp(lam * x) - lam * x
        lhs = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(trials))
        rhs = math.exp(0.75 * lam**2 * sigma_sq)
        rows.append(
            {
                "lambda": float(lam),
                "lhs": lhs,
                "standard_error": se,
                "rhs": rhs,
                "slack": rhs - lhs,
                "violated": bool(lhs > rhs + 3.0 * se),
            }
        )
    # E exp(X^2 / sigma^2) = (1 - 2 s^2 / sigma^2)^{-1/2} = e
    generator_moment = 1.0 / math.sqrt(1.0 - 2.0 * s**2 / sigma_sq)
    return {
        "s": s,
        "sigma_sq": sigma_sq,
        "generator_exp_square_moment": generator_moment,
        "rows": rows,
        "violations": sum(row["violated"] for row in rows),
    }


def check_hilbert_sum_tail(
    dim: int,
    N: int,
    trials: int,
    seed: int,
    eps_grid: Optional[Sequence[float]] = None,
) -> Dict[str, object]:
    """
    P(||Z_1 + ... + Z_N|| >= N eps) against 2 exp(-eps^2 N / (3 dim)) for Z_i ~ N(0, I_dim).

    The exact tail is the chi-square(dim) survival function at N eps^2.
    """
    if dim < 1 or N < 1 or trials < 2:
        raise ValueError("check_hilbert_sum_tail needs positive dim, N and at least two trials")
    if eps_grid is None:
        eps_grid = list(np.linspace(0.0, 2.0, 11))
    rng = make_rng(seed)
    norms = np.empty(trials)
    rows_per_chunk = max(1, _CHUNK_DRAWS // (N * dim))
    start = 0
    while start < trials:
        rows = min(rows_per_chunk, trials - start)
        sums = rng.standard_normal((rows, N, dim)).sum(axis=1)
        norms[start : start + rows] = np.linalg.norm(sums, axis=1)
        start += rows

    table = []
    for eps in eps_grid:
        p = float(np.mean(norms >= N * eps))
        se = math.sqrt(p * (1.0 - p) / trials)
        bound = bound_hilbert_sum(math.sqrt(dim), N, float(eps))
        table.append(
            {
                "eps": float(eps),
                "empirical": p,
                "standard_error": se,
                "exact": float(stats.chi2.sf(N * eps**2, dim)),
                "bound": bound,
                "violated": bool(p > bound + 3.0 * se),
            }
        )
    return {"dim": dim, "N": N, "trials": trials, "rows": table, "violations": sum(r["violated"] for r in table)}
