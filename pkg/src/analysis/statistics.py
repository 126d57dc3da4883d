"""
Error statistics: Luxemburg norm estimation, log-log rate fits,
gradient-deviation parameters and exceedance tables.

All functions are pure given their inputs (and seed, where one is taken).
"""

import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import optimize, special

from ..control import GradientOracle, LQProblem, gradient_deviation_norms
from ..stochastic import draw
from .bounds import bound_tail_pinelis

logger = logging.getLogger(__name__)

LUXEMBURG_RTOL = 1e-12
TAU_RTOL = 1e-6
EXCEEDANCE_QUANTILES = (0.5, 0.75, 0.9)


def _nonnegative(values: Sequence[float], name: str = "errors") -> np.ndarray:
    array = np.asarray(values, dtype=float).ravel()
    if array.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if np.any(array < 0) or not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must be finite and nonnegative")
    return array


def luxemburg_moment(errors: Sequence[float], nu: float) -> float:
    """(1/R) sum (exp((e_i/nu)^2) - 1)."""
    e = _nonnegative(errors)
    return float(np.exp(special.logsumexp((e / nu) ** 2) - math.log(e.size)) - 1.0)


def luxemburg_estimate(errors: Sequence[float]) -> float:
    """
    Empirical Luxemburg norm for phi(x) = exp(x^2) - 1.

    The unique nu > 0 with (1/R) sum (exp((e_i/nu)^2) - 1) = 1, by bisection;
    all-zero input returns 0.
    """
    e = _nonnegative(errors)
    e_max = float(e.max())
    if e_max == 0.0:
        return 0.0
    R = e.size
    if R == 1:
        return e_max / math.sqrt(math.log(2.0))

    log_target = math.log(2.0 * R)

    def excess(nu: float) -> float:
        # log-mean of exp((e/nu)^2) minus log 2; decreasing in nu
        return float(special.logsumexp((e / nu) ** 2)) - log_target

    lo = e_max / math.sqrt(math.log(1.0 + R)) * (1.0 - 1e-9)
    hi = e_max / math.sqrt(math.log(2.0)) * (1.0 + 1e-9)
    return float(optimize.bisect(excess, lo, hi, xtol=1e-300, rtol=LUXEMBURG_RTOL, maxiter=500))


def fit_rate(N_grid: Sequence[float], values: Sequence[float]) -> Dict[str, float]:
    """Least-squares fit ln(value) = logC + rate * ln(N)."""
    N = np.asarray(N_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if N.size < 2 or N.size != v.size:
        raise ValueError("fit_rate needs at least two (N, value) pairs of equal length")
    if np.any(v <= 0) or np.any(N <= 0):
        raise ValueError("fit_rate needs positive N and values")
    rate, log_c = np.polyfit(np.log(N), np.log(v), 1)
    return {"logC": float(log_c), "rate": float(rate)}


def sigma_tau_from_deviations(deviations: Sequence[float]) -> Dict[str, float]:
    """
    sigma_hat = RMS of the deviations; tau_hat = smallest tau with mean exp(d^2/tau^2) <= e.

    Jensen gives tau_hat >= sigma_hat, and tau = max d always satisfies the
    condition, so tau_hat is bisected on [sigma_hat, max d].
    """
    d = _nonnegative(deviations, "deviations")
    sigma = float(math.sqrt(np.mean(d**2)))
    d_max = float(d.max())
    if d_max == 0.0:
        return {"sigma_hat": 0.0, "tau_hat": 0.0}
    log_m = math.log(d.size)

    def excess(tau: float) -> float:
        return float(special.logsumexp((d / tau) ** 2)) - log_m - 1.0

    if excess(sigma) <= 0.0:
        return {"sigma_hat": sigma, "tau_hat": sigma}
    if excess(d_max) >= 0.0:
        return {"sigma_hat": sigma, "tau_hat": d_max}
    tau = optimize.bisect(excess, sigma, d_max, rtol=TAU_RTOL, maxiter=200)
    return {"sigma_hat": sigma, "tau_hat": float(tau)}


def estimate_sigma_tau(
    problem: LQProblem,
    u_star: np.ndarray,
    reference_gradient: np.ndarray,
    M: int = 10_000,
    seed: int = 0,
    oracle: Optional[GradientOracle] = None,
) -> Dict[str, float]:
    """Gradient deviation parameters from M fresh draws of ||grad G1(u*, xi) - grad F1(u*)||."""
    if M < 2:
        raise ValueError(f"estimate_sigma_tau needs M >= 2 samples, got {M}")
    samples = draw(problem.spec.distribution, M, seed)
    deviations = gradient_deviation_norms(problem, u_star, samples.samples, reference_gradient, oracle)
    result = sigma_tau_from_deviations(deviations)
    logger.info(f"Estimated sigma_hat={result['sigma_hat']:.4e}, tau_hat={result['tau_hat']:.4e} from M={M}")
    return result


def exceedance_grid(errors: Sequence[float], quantiles: Sequence[float] = EXCEEDANCE_QUANTILES) -> List[float]:
    """Error levels at fixed quantiles of the pooled errors."""
    e = _nonnegative(errors)
    return [float(q) for q in np.quantile(e, quantiles)]


def exceedance(errors: Sequence[float], eps: float) -> Dict[str, float]:
    """Empirical P(e >= eps) with its binomial standard error."""
    e = _nonnegative(errors)
    p = float(np.mean(e >= eps))
    return {"fraction": p, "standard_error": math.sqrt(p * (1.0 - p) / e.size)}


def exceedance_table(
    errors_by_N: Mapping[int, Sequence[float]],
    eps_grid: Sequence[float],
    alpha: float,
    tau: float,
) -> List[Dict[str, float]]:
    """One row per (N, eps): empirical exceedance against the Pinelis-type tail bound."""
    rows = []
    for N, errors in errors_by_N.items():
        for eps in eps_grid:
            stats = exceedance(errors, eps)
            bound = bound_tail_pinelis(alpha, tau, N, eps) if tau > 0 else (0.0 if eps > 0 else 1.0)
            rows.append(
                {
                    "N": int(N),
                    "eps": float(eps),
                    "fraction": stats["fraction"],
                    "standard_error": stats["standard_error"],
                    "bound": bound,
                    "violated": bool(stats["fraction"] > bound + 3.0 * stats["standard_error"]),
                }
            )
    return rows


def error_statistics(errors: Sequence[float]) -> Dict[str, float]:
    e = _nonnegative(errors)
    return {
        "mean_error": float(e.mean()),
        "mse": float(np.mean(e**2)),
        "luxemburg": luxemburg_estimate(e),
    }
