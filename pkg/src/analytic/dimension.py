"""
Finite- versus infinite-dimensional sample requirements for estimating a mean.

SAA for min (1/2)||u - E xi||^2 gives u_N* = sample mean, and u_N* is
eps-optimal iff ||mean||^2 <= eps (for zero-mean xi). In R^n with
xi ~ N(0, sigma^2 I) about n sigma^2 / eps samples are needed; in l2 with
independent coordinates of variance c / k^2 the tail bound gives a sufficient
N that depends on the coordinates only through E||xi||^2.
"""

import math
from typing import Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..stochastic import make_rng


class DimensionDemoSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_dim: int = Field(default=10, ge=1)
    sigma_sq: float = Field(default=1.0, gt=0)
    eps: float = Field(default=0.1, gt=0)
    trials: int = Field(default=10_000, ge=1)
    k_trunc: int = Field(default=100, ge=1)
    decay: float = Field(default=1.0, gt=0)
    eps_infinite: float = Field(default=0.5, gt=0)
    delta: float = Field(default=0.05, gt=0, lt=1)
    seed: int = 0


def finite_threshold(n_dim: int, sigma_sq: float, eps: float) -> float:
    """n sigma^2 / eps = E||zeta||^2 / eps."""
    return n_dim * sigma_sq / eps


def dimension_demo_finite(
    n_dim: int,
    sigma_sq: float,
    eps: float,
    trials: int,
    seed: int,
    N_grid: Optional[Sequence[int]] = None,
) -> Dict[str, object]:
    """
    P(||(1/N) sum zeta^i||^2 > eps) for zeta ~ N(0, sigma^2 I_n) across N.

    Each trial draws the sample mean from its exact law N(0, sigma^2 / N I_n),
    which has the same distribution as averaging N independent draws of zeta.
    Default N grid brackets the threshold n sigma^2 / eps by factors 1/4 to 4.
    """
    if n_dim < 1 or sigma_sq <= 0 or eps <= 0 or trials < 1:
        raise ValueError("dimension_demo_finite needs positive n_dim, sigma_sq, eps and trials")
    threshold = finite_threshold(n_dim, sigma_sq, eps)
    if N_grid is None:
        N_grid = sorted({max(1, int(round(threshold * f))) for f in (0.25, 0.5, 1.0, 2.0, 4.0)})
    rng = make_rng(seed)

    zeta = rng.normal(0.0, math.sqrt(sigma_sq), size=(trials, n_dim))
    second_moment = float(np.mean(np.sum(zeta**2, axis=1)))

    rows = []
    for N in N_grid:
        means = rng.normal(0.0, math.sqrt(sigma_sq / N), size=(trials, n_dim))
        squared = np.sum(means**2, axis=1)
        rows.append(
            {
                "N": int(N),
                "exceedance": float(np.mean(squared > eps)),
                "chi2_mean": float(np.mean(N * squared / sigma_sq)),
            }
        )
    return {
        "n_dim": n_dim,
        "sigma_sq": sigma_sq,
        "eps": eps,
        "threshold": threshold,
        "second_moment": second_moment,
        "second_moment_exact": n_dim * sigma_sq,
        "rows": rows,
    }


def infinite_second_moment(k_trunc: int, decay: float = 1.0) -> float:
    """E||xi||^2 = sum_{k <= k_trunc} c / k^2."""
    if k_trunc < 1:
        raise ValueError(f"k_trunc must be at least 1, got {k_trunc}")
    k = np.arange(1, k_trunc + 1, dtype=float)
    return float(np.sum(decay / k**2))


def infinite_required_N(second_moment: float, eps: float, delta: float) -> int:
    """ceil((3 / eps) ln(2 / delta) E||xi||^2)."""
    if not 0 < delta < 1 or eps <= 0:
        raise ValueError("infinite_required_N needs eps > 0 and delta in (0, 1)")
    return math.ceil(3.0 / eps * math.log(2.0 / delta) * second_moment)


def dimension_demo_infinite(
    k_trunc: int,
    decay: float,
    eps: float,
    delta: float,
    trials: int = 10_000,
    seed: int = 0,
) -> Dict[str, object]:
    """Sufficient N from the Hilbert-space tail bound and its Monte Carlo success frequency."""
    second_moment = infinite_second_moment(k_trunc, decay)
    N = infinite_required_N(second_moment, eps, delta)
    rng = make_rng(seed)
    k = np.arange(1, k_trunc + 1, dtype=float)
    means = rng.standard_normal((trials, k_trunc)) * np.sqrt(decay / (k**2 * N))
    success = float(np.mean(np.sum(means**2, axis=1) <= eps))
    return {
        "k_trunc": k_trunc,
        "decay": decay,
        "second_moment": second_moment,
        "required_N": N,
        "success_frequency": success,
        "target": 1.0 - delta,
        "holds": bool(success >= 1.0 - delta),
    }

