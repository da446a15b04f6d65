"""File formats: state files, JSON/CSV exports, and run manifests.

All floats are rendered with 17 significant digits, which round-trips IEEE
doubles exactly; CSV files use LF line endings.  Both properties make every
seeded output byte-reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import BlochForm, TwoQubitState, validate_state
from .factories import bell_diagonal, random_state, werner
from .knowledge import BoundCheck
from .canonical import FilterResult


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_render_json(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = ",\n".join(f"{pad}  {_render_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, np.ndarray):
        return _render_json(obj.tolist(), indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    """Deterministic pretty JSON with 17-significant-digit floats."""
    return _render_json(obj) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8", newline="\n")


def write_csv(path, header, rows) -> None:
    """CSV with the exact header given, 17-significant-digit floats, LF endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def complex_matrix_to_json(matrix) -> list[list[dict]]:
    m = np.asarray(matrix, dtype=complex)
    return [[{"re": float(cell.real), "im": float(cell.imag)} for cell in row] for row in m]


def _cell_to_complex(cell) -> complex:
    if isinstance(cell, dict):
        unknown = set(cell) - {"re", "im"}
        if unknown:
            raise ValueError(f"matrix cell has unknown keys {sorted(unknown)}")
        return complex(float(cell.get("re", 0.0)), float(cell.get("im", 0.0)))
    if isinstance(cell, (int, float)):
        return complex(float(cell), 0.0)
    raise ValueError(f"matrix cell must be a number or {{'re':..,'im':..}}, got {cell!r}")


def complex_matrix_from_json(data, shape=(4, 4)) -> np.ndarray:
    rows = list(data)
    matrix = np.array([[_cell_to_complex(cell) for cell in row] for row in rows], dtype=complex)
    if matrix.shape != shape:
        raise ValueError(f"expected matrix of shape {shape}, got {matrix.shape}")
    return matrix


def load_state(path) -> TwoQubitState:
    """Read a state file: either an explicit matrix or a named factory.

    Supported forms::

        {"matrix": [[{"re": .., "im": ..}, ...] x4]}
        {"factory": "werner", "p": 0.82}
        {"factory": "bell_diagonal", "lambdas": [.., .., .., ..]}
        {"factory": "random", "seed": 7, "ancilla_dim": 4}
    """
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("state file must contain a JSON object")
    if "matrix" in data:
        return validate_state(complex_matrix_from_json(data["matrix"]))
    if "factory" in data:
        name = data["factory"]
        if name == "werner":
            return werner(float(data["p"]))
        if name == "bell_diagonal":
            return bell_diagonal(data["lambdas"])
        if name == "random":
            return random_state(int(data["seed"]), int(data.get("ancilla_dim", 4)))
        raise ValueError(f"unknown state factory {name!r}")
    raise ValueError("state file must contain either 'matrix' or 'factory'")


def state_to_json(state: TwoQubitState) -> dict:
    return {"matrix": complex_matrix_to_json(state.matrix)}


def bloch_to_json(form: BlochForm) -> dict:
    return {"n": form.n.tolist(), "m": form.m.tolist(), "T": form.T.tolist()}


def bound_check_to_json(check: BoundCheck) -> dict:
    return {
        "sum": check.sum_of_squares,
        "bound": check.bound,
        "slack": check.slack,
        "b_max": check.b_max,
    }


def filter_result_to_json(result: FilterResult) -> dict:
    return {
        "f_signal": complex_matrix_to_json(result.f_signal),
        "f_meter": complex_matrix_to_json(result.f_meter),
        "success_probability": result.success_probability,
        "iterations": result.iterations,
        "b_max_in": result.b_max_in,
        "b_max_out": result.b_max_out,
    }


@dataclass
class RunManifest:
    """Provenance record written beside every data output.

    Re-running ``replay_argv`` regenerates the recorded outputs byte for byte.
    """

    command: str
    parameters: dict
    seed: int | None
    outputs: list[str]
    replay_argv: list[str]
    duration_s: float = 0.0
    version: str = field(default=__version__)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "parameters": self.parameters,
            "outputs": list(self.outputs),
            "replay_argv": list(self.replay_argv),
            "duration_s": self.duration_s,
        }


def manifest_path(output_path) -> Path:
    path = Path(output_path)
    return path.with_name(path.name + ".manifest.json")


def write_manifest(output_path, manifest: RunManifest) -> Path:
    target = manifest_path(output_path)
    write_json(target, manifest.to_json())
    return target


class Stopwatch:
    def __init__(self):
        self.start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start
