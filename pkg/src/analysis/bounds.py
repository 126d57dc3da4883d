"""Closed-form error and tail bounds for SAA solutions of strongly convex problems."""

import math


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def bound_mean_square(alpha: float, sigma: float, N: int) -> float:
    """
    Mean-square error bound E||u* - u_N*||^2 <= sigma^2 / (alpha^2 N).

    Args:
        alpha: Strong convexity parameter
        sigma: Gradient deviation standard bound
        N: Sample size

    Returns:
        The bound on the mean-square error
    """
    _positive(alpha=alpha, N=N)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return sigma**2 / (alpha**2 * N)


def bound_tail_pinelis(alpha: float, tau: float, N: int, eps: float) -> float:
    """
    P(||u* - u_N*|| >= eps) <= min(1, 2 exp(-N eps^2 alpha^2 / (3 tau^2))).

    Args:
        alpha: Strong convexity parameter
        tau: Sub-Gaussian parameter of the gradient deviation
        N: Sample size
        eps: Error level

    Returns:
        Probability bound in [0, 1]
    """
    _positive(alpha=alpha, tau=tau, N=N)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return min(1.0, 2.0 * math.exp(-N * eps**2 * alpha**2 / (3.0 * tau**2)))


def sample_size_for(alpha: float, tau: float, eps: float, delta: float) -> int:
    """Smallest N with ||u* - u_N*|| < eps at probability at least 1 - delta."""
    _positive(alpha=alpha, tau=tau, eps=eps)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(3.0 * tau**2 * math.log(2.0 / delta) / (alpha**2 * eps**2))


def error_radius(alpha: float, tau: float, N: int, delta: float) -> float:
    """Error level eps that the tail bound guarantees with probability 1 - delta."""
    _positive(alpha=alpha, tau=tau, N=N)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return (tau / alpha) * math.sqrt(3.0 * math.log(2.0 / delta) / N)


def bound_luxemburg(alpha: float, tau: float, N: int) -> float:
    """Luxemburg (exp(x^2) - 1) norm bound 3 sqrt(3) tau / (alpha sqrt(N))."""
    _positive(alpha=alpha, N=N)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return 3.0 * math.sqrt(3.0) * tau / (alpha * math.sqrt(N))


def bound_tail_luxemburg(alpha: float, tau: float, N: int, eps: float) -> float:
    """Tail bound implied by the Luxemburg bound via Markov: min(1, 2 exp(-N eps^2 alpha^2 / (27 tau^2)))."""
    _positive(alpha=alpha, tau=tau, N=N)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return min(1.0, 2.0 * math.exp(-N * eps**2 * alpha**2 / (27.0 * tau**2)))


def bound_hilbert_sum(constant: float, N: int, eps: float, variant: str = "expSquare") -> float:
    """
    P(||Z_1 + ... + Z_N|| >= N eps) <= min(1, 2 exp(-eps^2 N / (3 c^2))).

    `constant` is tau for variant "expSquare" (E exp(||Z||^2 / tau^2) <= e) and
    sigma for variant "cosh" (E cosh(lambda ||Z||) <= exp(lambda^2 sigma^2 / 2)).
    Both variants share the same formula.
    """
    if variant not in ("expSquare", "cosh"):
        raise ValueError(f"Unknown variant '{variant}', expected 'expSquare' or 'cosh'")
    _positive(constant=constant, N=N)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return min(1.0, 2.0 * math.exp(-eps**2 * N / (3.0 * constant**2)))
