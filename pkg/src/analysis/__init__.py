"""Replication harness, error statistics, bound evaluators and report writers."""

from .bounds import (
    bound_hilbert_sum,
    bound_luxemburg,
    bound_mean_square,
    bound_tail_luxemburg,
    bound_tail_pinelis,
    error_radius,
    sample_size_for,
)
from .replications import ReplicationRecord, TailExperimentReport, run_replications
from .reports import (
    build_manifest,
    build_summary,
    config_digest,
    error_record,
    read_reference_csv,
    write_errors_csv,
    write_frame,
    write_json,
    write_reference_csv,
)
from .statistics import (
    error_statistics,
    estimate_sigma_tau,
    exceedance,
    exceedance_grid,
    exceedance_table,
    fit_rate,
    luxemburg_estimate,
    luxemburg_moment,
    sigma_tau_from_deviations,
)

__all__ = [
    # Bounds
    "bound_mean_square",
    "bound_tail_pinelis",
    "bound_tail_luxemburg",
    "bound_luxemburg",
    "bound_hilbert_sum",
    "sample_size_for",
    "error_radius",

    # Statistics
    "luxemburg_estimate",
    "luxemburg_moment",
    "fit_rate",
    "estimate_sigma_tau",
    "sigma_tau_from_deviations",
    "exceedance",
    "exceedance_grid",
    "exceedance_table",
    "error_statistics",

    # Replications
    "run_replications",
    "ReplicationRecord",
    "TailExperimentReport",

    # Reports
    "write_errors_csv",
    "write_reference_csv",
    "read_reference_csv",
    "write_frame",
    "write_json",
    "build_summary",
    "build_manifest",
    "config_digest",
    "error_record",
]
