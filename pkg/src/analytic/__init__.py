"""Closed-form and Monte Carlo constructions that exercise the bounds without a PDE."""

from .concentration import (
    ConcentrationSpec,
    check_exp_moment_inequality,
    check_hilbert_sum_tail,
    sub_gaussian_sigma_sq,
)
from .dimension import (
    DimensionDemoSpec,
    dimension_demo_finite,
    dimension_demo_infinite,
    finite_threshold,
    infinite_required_N,
    infinite_second_moment,
)
from .lognormal import (
    YD_NORM,
    LognormalDemoSpec,
    check_threshold,
    gradient_deviation,
    lognormal_gradient_norm,
    lognormal_violation_evidence,
    normal_equation_residual,
    optimal_coefficient,
    violation_threshold,
)
from .optimality import (
    OptimalityExampleSpec,
    chi2_exp_moment,
    eps_grid_for,
    optimality_example_errors,
    optimality_exact_tail,
    optimality_gap_constant,
    optimality_tail_table,
    optimality_tau_sq,
)

__all__ = [
    # Tail-bound optimality
    "OptimalityExampleSpec",
    "optimality_example_errors",
    "optimality_exact_tail",
    "optimality_tail_table",
    "optimality_gap_constant",
    "optimality_tau_sq",
    "chi2_exp_moment",
    "eps_grid_for",

    # Log-normal diffusion
    "LognormalDemoSpec",
    "lognormal_gradient_norm",
    "lognormal_violation_evidence",
    "gradient_deviation",
    "optimal_coefficient",
    "normal_equation_residual",
    "violation_threshold",
    "check_threshold",
    "YD_NORM",

    # Dimension dependence
    "DimensionDemoSpec",
    "dimension_demo_finite",
    "dimension_demo_infinite",
    "finite_threshold",
    "infinite_second_moment",
    "infinite_required_N",

    # Concentration inequalities
    "ConcentrationSpec",
    "check_exp_moment_inequality",
    "check_hilbert_sum_tail",
    "sub_gaussian_sigma_sq",
]
