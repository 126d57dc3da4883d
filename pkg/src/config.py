import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .analytic import ConcentrationSpec, DimensionDemoSpec, LognormalDemoSpec
from .control import LQProblemSpec, example1_spec, example2_spec
from .errors import ConfigError, ReportIOError
from .solvers import AtomGrid, ExactMoments, ReferenceStrategy, SolverOptions

# Explicitly load .env from the project root so it works regardless of CWD
_PROJECT_ROOT = Path(__file__).resolve().parents[1]
load_dotenv(_PROJECT_ROOT / ".env")

Scale = Literal["desk", "paper"]
ExperimentKind = Literal[
    "example1", "example2", "optimality5", "lognormal61", "dimension8", "bounds3", "solve-once"
]
SAA_KINDS = ("example1", "example2")
ANALYTIC_KINDS = ("optimality5", "lognormal61", "dimension8", "bounds3")


class Settings(BaseModel):
    """
    Process-level settings, read from SAA_* environment variables.

    Experiment parameters live in ExperimentConfig; these only supply defaults
    for where to write, how many threads to use and how to log.
    """

    environment: Literal["local", "ci"] = Field(
        default_factory=lambda: os.getenv("SAA_ENV", "local")
    )
    project_root: Path = Field(
        default_factory=lambda: Path(__file__).resolve().parents[1]
    )
    output_dir: Path = Field(
        default_factory=lambda: Path(os.getenv("SAA_OUTPUT_DIR", "results"))
    )
    threads: int = Field(
        default_factory=lambda: int(os.getenv("SAA_THREADS", "1"))
    )
    log_level: str = Field(
        default_factory=lambda: os.getenv("SAA_LOG_LEVEL", "INFO")
    )
    scale: Scale = Field(
        default_factory=lambda: os.getenv("SAA_SCALE", "desk")  # type: ignore[arg-type]
    )
    base_seed: int = Field(
        default_factory=lambda: int(os.getenv("SAA_BASE_SEED", "20210402"))
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached Settings singleton. Import this instead of instantiating Settings directly."""
    return Settings()


class OptimalityRunSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(default=1.0, gt=0)
    N_grid: List[int] = Field(default_factory=lambda: [16, 64, 256])
    replications: int = Field(default=100_000, ge=1)
    eps_multiples: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5])


class SolveOnceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    base: Literal["example1", "example2"] = "example1"
    N: int = Field(default=16, ge=1)


class ExperimentConfig(BaseModel):
    """One experiment run. Unset fields are filled by `resolve` from the kind and scale."""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    scale: Optional[Scale] = None
    problem: Optional[LQProblemSpec] = None
    reference: Optional[ReferenceStrategy] = None
    N_grid: Optional[List[int]] = None
    replications: int = Field(default=50, ge=1)
    base_seed: Optional[int] = Field(default=None, ge=0)
    sigma_tau_samples: int = Field(default=10_000, ge=0)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    threads: Optional[int] = Field(default=None, ge=1)
    output_dir: Optional[Path] = None
    optimality: OptimalityRunSpec = Field(default_factory=OptimalityRunSpec)
    lognormal: LognormalDemoSpec = Field(default_factory=LognormalDemoSpec)
    dimension: DimensionDemoSpec = Field(default_factory=DimensionDemoSpec)
    concentration: ConcentrationSpec = Field(default_factory=ConcentrationSpec)
    solve_once: SolveOnceSpec = Field(default_factory=SolveOnceSpec)

    @property
    def problem_kind(self) -> Optional[str]:
        if self.kind in SAA_KINDS:
            return self.kind
        if self.kind == "solve-once":
            return self.solve_once.base
        return None

    def resolve(self, settings: Optional[Settings] = None) -> "ExperimentConfig":
        """Copy with every defaulted field made explicit, so the dump reproduces the run."""
        settings = settings or get_settings()
        scale = self.scale or settings.scale
        update: Dict[str, Any] = {
            "scale": scale,
            "base_seed": settings.base_seed if self.base_seed is None else self.base_seed,
            "threads": self.threads or settings.threads,
            "output_dir": self.output_dir or settings.output_dir / self.kind,
        }
        base = self.problem_kind
        if base is not None:
            if self.problem is None:
                update["problem"] = example1_spec(scale) if base == "example1" else example2_spec(scale)
            if self.reference is None:
                update["reference"] = default_reference(base, scale)
            if self.N_grid is None and self.kind in SAA_KINDS:
                top = 256 if base == "example1" else 128
                update["N_grid"] = [2**i for i in range(1, top.bit_length())]
        return self.model_copy(update=update)

    def dump(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def default_reference(base: str, scale: Scale):
    if base == "example1":
        return ExactMoments()
    return AtomGrid(k=10 if scale == "desk" else 50)


def parse_override_value(raw: str) -> Any:
    """JSON literal when it parses, otherwise the raw string."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply `a.b.c=value` assignments to a raw config document in place."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"Override '{item}' is not of the form key=value")
        path, raw = item.split("=", 1)
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ConfigError(f"Override '{item}' has an empty key")
        node = document
        for key in keys[:-1]:
            child = node.get(key)
            if child is None:
                child = node[key] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"Override '{item}': '{key}' is not a mapping")
            node = child
        node[keys[-1]] = parse_override_value(raw)
    return document


def read_config_document(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ReportIOError(f"Cannot read config {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"Config {path} must be a JSON object")
    return document


def _prefill_problem(document: Dict[str, Any], overrides: Sequence[str]) -> None:
    """Materialize the default problem and reference when overrides edit fields inside them."""
    kind = document.get("kind")
    base = document.get("solve_once", {}).get("base", "example1") if kind == "solve-once" else kind
    if base not in SAA_KINDS:
        return
    scale = document.get("scale") or get_settings().scale
    targets = {item.split("=", 1)[0].strip().split(".")[0] for item in overrides if "." in item.split("=", 1)[0]}
    if "problem" in targets and "problem" not in document:
        spec = example1_spec(scale) if base == "example1" else example2_spec(scale)
        document["problem"] = spec.model_dump(mode="json", by_alias=True)
    if "reference" in targets and "reference" not in document:
        document["reference"] = default_reference(base, scale).model_dump(mode="json")


def load_config(
    path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    **explicit: Any,
) -> ExperimentConfig:
    """
    Build a validated ExperimentConfig.

    Precedence: config file, then --set overrides, then explicit CLI values
    (kind, scale, base_seed, threads, output_dir) that are not None.
    """
    document = read_config_document(path)
    given = {k: (str(v) if isinstance(v, Path) else v) for k, v in explicit.items() if v is not None}
    document.update(given)
    _prefill_problem(document, overrides)
    apply_overrides(document, overrides)
    document.update(given)
    if "kind" not in document:
        raise ConfigError("Experiment kind missing: pass it on the command line or set 'kind' in the config")
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError(f"Invalid experiment config:\n{exc}") from exc
