"""
Report artifacts: raw-error CSV, JSON summary, reference-solution field dump,
run manifest and machine-readable error record.

Floats in CSV files are written with 17 significant digits so reruns are
byte-identical.
"""

import hashlib
import json
import logging
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from ..errors import ReportIOError
from ..fem import P0Function
from .replications import TailExperimentReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
ERROR_COLUMNS = ["N", "replication", "seed", "error", "kkt_residual", "iterations"]
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "langgraph", "python-dotenv")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def canonical_json(document: Any) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), default=_json_default)


def config_digest(config: Dict[str, Any]) -> str:
    """sha256 of the canonical (sorted, compact) JSON encoding."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def package_versions(packages: Iterable[str] = TRACKED_PACKAGES) -> Dict[str, Optional[str]]:
    versions = {}
    for name in packages:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def software_version() -> str:
    try:
        return metadata.version("saa-tailbounds")
    except metadata.PackageNotFoundError:
        return "0.1.0"


def _ensure_dir(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportIOError(f"Cannot create output directory {path.parent}: {exc}") from exc


def write_json(document: Any, path: Path) -> Path:
    path = Path(path)
    _ensure_dir(path)
    try:
        path.write_text(json.dumps(document, indent=2, sort_keys=True, default=_json_default) + "\n")
    except OSError as exc:
        raise ReportIOError(f"Cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")
    return path


def errors_frame(report: TailExperimentReport) -> pd.DataFrame:
    rows = sorted(report.records, key=lambda rec: (rec.N, rec.replication))
    frame = pd.DataFrame([{col: getattr(rec, col) for col in ERROR_COLUMNS} for rec in rows], columns=ERROR_COLUMNS)
    return frame.astype({"N": "int64", "replication": "int64", "seed": "uint64", "iterations": "int64"})


def write_frame(frame: pd.DataFrame, path: Path, header_line: Optional[str] = None) -> Path:
    path = Path(path)
    _ensure_dir(path)
    try:
        with path.open("w", newline="") as handle:
            if header_line is not None:
                handle.write(f"# {header_line}\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise ReportIOError(f"Cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_errors_csv(report: TailExperimentReport, path: Path) -> Path:
    """Columns N, replication, seed, error, kkt_residual, iterations; sorted by (N, replication)."""
    return write_frame(errors_frame(report), path)


def reference_frame(u: P0Function) -> pd.DataFrame:
    centers = u.mesh.centroids
    return pd.DataFrame(
        {
            "cell_index": np.arange(u.mesh.num_cells),
            "x_center": centers[:, 0],
            "y_center": centers[:, 1],
            "u_value": u.values,
        }
    )


def write_reference_csv(u: P0Function, path: Path) -> Path:
    """Cell-value dump in cell order, preceded by a '# n=<n>' line."""
    return write_frame(reference_frame(u), path, header_line=f"n={u.mesh.n}")


def read_reference_csv(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with path.open() as handle:
            first = handle.readline().strip()
            frame = pd.read_csv(handle, float_precision="round_trip")
    except OSError as exc:
        raise ReportIOError(f"Cannot read {path}: {exc}") from exc
    if not first.startswith("# n="):
        raise ReportIOError(f"{path} does not start with a '# n=' header")
    return {"n": int(first[len("# n="):]), "frame": frame}


def build_summary(
    config: Dict[str, Any],
    statistics: Dict[str, Any],
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    return {
        "config": config,
        "config_digest": config_digest(config),
        "software_version": software_version(),
        "statistics": statistics,
        **(extra or {}),
    }


def build_manifest(config: Dict[str, Any], seeds: Dict[str, Any], files: List[str]) -> Dict[str, Any]:
    return {
        "config_digest": config_digest(config),
        "seeds": seeds,
        "files": sorted(files),
        "software_version": software_version(),
        "packages": package_versions(),
    }


def error_record(exc: BaseException, exit_code: int) -> Dict[str, Any]:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code}
    coordinates = getattr(exc, "coordinates", None)
    if coordinates is not None:
        record["coordinates"] = {"N": coordinates[0], "replication": coordinates[1]}
    history = getattr(exc, "history", None)
    if history:
        record["residual_history"] = list(history)
    return record
