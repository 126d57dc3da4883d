from pathlib import Path
from typing import Any, Dict, List, Optional, TypedDict

try:
    from typing import NotRequired
except ImportError:  # Python < 3.11
    from typing_extensions import NotRequired

import numpy as np

from .analysis import TailExperimentReport
from .config import ExperimentConfig
from .control import GradientOracle, LQProblem
from .solvers import SAAResult


class ExperimentState(TypedDict, total=False):
    """
    Shared state passed between the pipeline stages.

    All keys are optional so each stage only needs to populate its own outputs.
    """

    # Inputs
    config: ExperimentConfig  # resolved
    out_dir: Path

    # Problem operators (SAA kinds and solve-once)
    problem: NotRequired[Optional[LQProblem]]
    oracle: NotRequired[Optional[GradientOracle]]

    # Stage outputs
    reference: NotRequired[Optional[SAAResult]]
    reference_gradient: NotRequired[Optional[np.ndarray]]
    report: NotRequired[Optional[TailExperimentReport]]
    solution: NotRequired[Optional[SAAResult]]
    analytic: NotRequired[Dict[str, Any]]  # JSON-ready results of an analytic kind
    tables: NotRequired[Dict[str, List[Dict[str, Any]]]]  # file stem -> rows

    # Bookkeeping
    seeds: NotRequired[Dict[str, Any]]
    files: NotRequired[List[str]]
    errors: NotRequired[List[str]]
