"""Serializable run reports, CSV grids and the benchmark tables."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .problem import Problem, builtin
from .solver import SolverConfig, TrainedModel, default_config, solve

CSV_HEADERS = {1: "t,value", 2: "x,t,value", "scan": "lambda,residual_max,status"}


def fmt(value) -> str:
    """Shortest round-trip form of a float (at most 17 significant digits)."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return "null" if not math.isfinite(obj) else fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    return _json(obj) + "\n"


@dataclass
class SolveReport:
    problem: str
    config: dict
    residual_max: float
    residual_rms: float
    picard_iterations: int
    converged: bool
    solution_samples: list
    max_error_vs_exact: float | None = None
    wall_time_ms: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.residual_max < 0 or self.residual_rms < 0:
            raise ValueError("residuals must be non-negative")
        self.solution_samples = sorted((tuple(float(v) for v in row) for row in self.solution_samples))

    def to_dict(self) -> dict:
        """Report body; wall time is left out so identical runs give identical files."""
        out = dataclasses.asdict(self)
        out.pop("wall_time_ms")
        out["solution_samples"] = [list(row) for row in self.solution_samples]
        return out

    def to_json(self) -> str:
        return to_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> SolveReport:
        return cls(**data)


def sample_points(problem: Problem, t_values=None, x_values=None) -> np.ndarray:
    """Points for solution samples; 100 (1-D) or 41 x 41 (2-D) uniform by default."""
    if t_values is None:
        t_values = np.linspace(*problem.time_domain, 100 if problem.dimension == 1 else 41)
    if problem.dimension == 1:
        return np.asarray(t_values, dtype=float)
    if x_values is None:
        x_values = np.linspace(*problem.space_domain, 41)
    xx, tt = np.meshgrid(x_values, t_values, indexing="ij")
    return np.column_stack([xx.ravel(), tt.ravel()])


def make_report(problem: Problem, model: TrainedModel, points, wall_time_ms=None) -> SolveReport:
    pts = np.asarray(points, dtype=float)
    coords = (pts,) if problem.dimension == 1 else (pts[:, 0], pts[:, 1])
    values = np.atleast_1d(model(*coords))
    err = None
    if problem.exact is not None:
        exact = np.array([float(problem.exact(*c)) for c in zip(*coords)])
        err = float(np.max(np.abs(values - exact)))
    rows = [(*c, v) for c, v in zip(zip(*coords), values)]
    return SolveReport(
        problem=problem.name,
        config=model.config.as_dict(),
        residual_max=model.residual_max,
        residual_rms=model.residual_rms,
        picard_iterations=model.picard_iterations,
        converged=model.converged,
        solution_samples=rows,
        max_error_vs_exact=err,
        wall_time_ms=wall_time_ms,
    )


def samples_csv(report: SolveReport, dimension: int) -> str:
    lines = [CSV_HEADERS[dimension]]
    lines += [",".join(fmt(v) for v in row) for row in report.solution_samples]
    return "\n".join(lines) + "\n"


def scan_csv(trace) -> str:
    lines = [CSV_HEADERS["scan"]]
    lines += [f"{fmt(tr.lam)},{fmt(tr.residual_max)},{tr.status}" for tr in trace]
    return "\n".join(lines) + "\n"


TABLE_EXAMPLES = ("ex2", "ex4")


def ex2_table(degrees=(10, 15, 20), config: SolverConfig | None = None) -> str:
    """Predicted u(t), t = 0.1 .. 1.0, one column per basis size (d = N)."""
    problem = builtin("ex2")
    base = config or default_config("ex2")
    ts = np.round(np.arange(1, 11) * 0.1, 12)
    columns = []
    for d in degrees:
        model = solve(problem, dataclasses.replace(base, d=d, n_points=d))
        columns.append(model(ts))
    lines = ["t," + ",".join(f"d={d}" for d in degrees)]
    for i, t in enumerate(ts):
        lines.append(",".join([fmt(t)] + [fmt(col[i]) for col in columns]))
    return "\n".join(lines) + "\n"


def ex4_table(config: SolverConfig | None = None) -> str:
    """Predicted u(x, t) on x = 0, 0.1, .., 1 (rows) and t = 0, 0.2, .., 1 (columns)."""
    problem = builtin("ex4")
    model = solve(problem, config or default_config("ex4"))
    xs = np.round(np.arange(11) * 0.1, 12)
    ts = np.round(np.arange(6) * 0.2, 12)
    values = model(xs[:, None], ts[None, :])
    lines = ["x," + ",".join(f"t={fmt(t)}" for t in ts)]
    for i, x in enumerate(xs):
        lines.append(",".join([fmt(x)] + [fmt(v) for v in values[i]]))
    return "\n".join(lines) + "\n"
