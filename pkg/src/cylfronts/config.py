"""Run configuration: schema-validated JSON with sections grid, problem,
continuation, and output.

Unknown keys are rejected with their full key path; omitted keys take the
documented defaults, and the effective configuration (defaults included) is
echoed into the run summary for provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bore import BoreProblem
from .continuation import ContinuationConfig
from .errors import ConfigurationError
from .grid import build_grid
from .robin import RobinProblem, quartic_nonlinearity

_GRID_SCHEMA = {
    "half_length": (float, 80.0),
    "nx": (int, 401),
    "ny": (int, 41),
}
_PROBLEM_SCHEMA = {
    "kind": (str, "robin"),
    "a": (float, 1.0),
    "rho1": (float, 1.0),
    "rho2": (float, 0.25),
    "delta": (float, 1e-3),
}
_CONTINUATION_SCHEMA = {
    "seed_param": (float, None),
    "ds": (float, 0.002),
    "ds_min": (float, 1e-7),
    "ds_max": (float, 0.004),
    "eps_newton": (float, 1e-10),
    "max_steps": (int, 40),
    "max_newton_iters": (int, 25),
    "n_max": (float, 50.0),
    "tol_plateau": (float, 0.02),
    "plateau_fraction": (float, 0.15),
    "sigma_guard": (float, 1e-3),
    "loop_tol": (float, 1e-8),
    "direction": (float, 1.0),
    "lam_min": (float, -np.inf),
    "lam_max": (float, np.inf),
    "tail_tol": (float, 1e-6),
    "tol_flow_force": (float, 1e-6),
    "snapshot_stride": (int, 0),
    "mono_floor_rel": (float, 1e-10),
}
_OUTPUT_SCHEMA = {
    "directory": (str, "."),
    "csv_name": (str, "branch.csv"),
    "summary_name": (str, "summary.json"),
}
_SCHEMA = {
    "grid": _GRID_SCHEMA,
    "problem": _PROBLEM_SCHEMA,
    "continuation": _CONTINUATION_SCHEMA,
    "output": _OUTPUT_SCHEMA,
}


@dataclass
class RunConfig:
    grid: dict = field(default_factory=dict)
    problem: dict = field(default_factory=dict)
    continuation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "grid": dict(self.grid),
            "problem": dict(self.problem),
            "continuation": dict(self.continuation),
            "output": dict(self.output),
        }


def _validate_section(name: str, raw: dict, schema: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigurationError(f"section '{name}' must be an object")
    out = {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigurationError(f"unknown key '{name}.{key}'")
        typ, _default = schema[key]
        if typ is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigurationError(f"'{name}.{key}' must be a number")
            value = float(value)
        elif typ is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigurationError(f"'{name}.{key}' must be an integer")
        elif typ is str and not isinstance(value, str):
            raise ConfigurationError(f"'{name}.{key}' must be a string")
        out[key] = value
    for key, (typ, default) in schema.items():
        if key not in out:
            if default is None:
                raise ConfigurationError(f"missing required key '{name}.{key}'")
            out[key] = default
    return out


def parse_config(doc: dict) -> RunConfig:
    """Validate a raw mapping against the schema, filling defaults."""
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be an object")
    for key in doc:
        if key not in _SCHEMA:
            raise ConfigurationError(f"unknown section '{key}'")
    sections = {
        name: _validate_section(name, doc.get(name, {}), schema)
        for name, schema in _SCHEMA.items()
    }
    kind = sections["problem"]["kind"]
    if kind not in ("robin", "bore"):
        raise ConfigurationError("'problem.kind' must be 'robin' or 'bore'")
    return RunConfig(**sections)


def load_config(path) -> RunConfig:
    """Read and validate a JSON run configuration."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    return parse_config(doc)


def build_problem(rc: RunConfig):
    """Instantiate the grid and problem described by a RunConfig."""
    kind = rc.problem["kind"]
    layout = "single" if kind == "robin" else "two-layer"
    grid = build_grid(
        rc.grid["half_length"], rc.grid["nx"], rc.grid["ny"], layout
    )
    if kind == "robin":
        return RobinProblem(grid, quartic_nonlinearity(rc.problem["a"]))
    return BoreProblem(
        grid, rc.problem["rho1"], rc.problem["rho2"], rc.problem["delta"]
    )


def build_continuation(rc: RunConfig) -> ContinuationConfig:
    return ContinuationConfig(**rc.continuation)
