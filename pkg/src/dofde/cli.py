"""Command-line interface: ``dofde solve | scan-lambda | table``.

Exit codes: 0 success, 2 usage error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import reports
from .config import ProblemFileError, load_problem
from .problem import BUILTIN_IDS, builtin
from .solver import DEFAULT_CONFIGS, SolverConfig, lambda_random_search, solve

log = logging.getLogger("dofde")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3
OUT_ENV = "DOFDE_OUT"


class UsageError(Exception):
    pass


def _ints(text: str):
    parts = [int(v) for v in text.split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _range(text: str) -> tuple[float, float]:
    try:
        low, high = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected low:high, got {text!r}") from None
    if not low < high:
        raise argparse.ArgumentTypeError("range needs low < high")
    return low, high


def parse_sample_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with both ends included."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("sample grid needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def _add_problem_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=BUILTIN_IDS, help="built-in problem")
    src.add_argument("--config", type=Path, help="problem file")
    p.add_argument("--d", type=_ints, help="basis size; d_x,d_t in 2-D")
    p.add_argument("--n", type=_ints, help="collocation points; n_x,n_t in 2-D")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--q", type=int, help="Gauss-Legendre order for distributed terms")
    p.add_argument("--formulation", choices=("primal", "dual"))
    p.add_argument("--constraint-weight", type=float)
    p.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./dofde-out)")


_FILE_KEYS = {
    "d": ("d", _ints),
    "n": ("n_points", _ints),
    "gamma": ("gamma", float),
    "lambda": ("lam", float),
    "q": ("quadrature_order", int),
    "formulation": ("formulation", str),
    "constraint_weight": ("constraint_weight", float),
    "picard_max_iters": ("picard_max_iters", int),
    "picard_tol": ("picard_tol", float),
}


def _problem_and_config(args):
    if args.example:
        problem = builtin(args.example)
        fields = dataclasses.asdict(DEFAULT_CONFIGS[args.example])
    else:
        try:
            problem, file_opts = load_problem(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read problem file: {exc}") from None
        except ProblemFileError as exc:
            raise UsageError(f"bad problem file {args.config}: {exc}") from None
        fields = {}
        for key, value in file_opts.items():
            if key not in _FILE_KEYS:
                raise UsageError(f"unknown solver option {key!r} in {args.config}")
            name, conv = _FILE_KEYS[key]
            fields[name] = conv(value)
    for attr, name in (
        ("d", "d"),
        ("n", "n_points"),
        ("gamma", "gamma"),
        ("lam", "lam"),
        ("q", "quadrature_order"),
        ("formulation", "formulation"),
        ("constraint_weight", "constraint_weight"),
    ):
        value = getattr(args, attr)
        if value is not None:
            fields[name] = value
    if "d" not in fields:
        raise UsageError("--d is required for problem files without a [solver] d")
    fields.setdefault("n_points", fields["d"])
    want = 0 if problem.dimension == 1 else 1
    for name in ("d", "n_points"):
        if np.ndim(fields[name]) != want:
            shape = "one integer" if want == 0 else "an x,t pair"
            raise UsageError(f"{problem.dimension}-D problem {problem.name!r} needs {shape} for --{name[0]}")
    try:
        config = SolverConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return problem, config


def _out_dir(args) -> Path:
    out = args.out or Path(os.environ.get(OUT_ENV, "dofde-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_solve(args) -> int:
    problem, config = _problem_and_config(args)
    t_values = args.sample_grid
    start = time.perf_counter()
    model = solve(problem, config)
    wall = (time.perf_counter() - start) * 1e3
    points = reports.sample_points(problem, t_values)
    report = reports.make_report(problem, model, points, wall_time_ms=wall)
    out = _out_dir(args)
    _write(out / "report.json", report.to_json())
    _write(out / "solution.csv", reports.samples_csv(report, problem.dimension))
    _write(out / "timing.json", reports.to_json({"wall_time_ms": wall}))
    log.info("solved %s in %.1f ms; residual_max %.3e", problem.name, wall, model.residual_max)
    return EXIT_OK


def cmd_scan_lambda(args) -> int:
    problem, config = _problem_and_config(args)
    low, high = args.range
    if not low > -0.5:
        raise UsageError("lambda range must lie above -0.5")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    best, trace = lambda_random_search(problem, config, (low, high), args.trials, args.seed)
    out = _out_dir(args)
    _write(out / "scan.csv", reports.scan_csv(trace))
    body = {
        "problem": problem.name,
        "config": config.as_dict(),
        "range": [low, high],
        "trials": args.trials,
        "seed": args.seed,
        "best_lambda": best,
        "best_residual_max": min((tr.residual_max for tr in trace if tr.status == "ok"), default=None),
    }
    _write(out / "report.json", reports.to_json(body))
    return EXIT_OK


def cmd_table(args) -> int:
    if args.example not in reports.TABLE_EXAMPLES:
        raise UsageError(f"no table grid for {args.example}; tables exist for {', '.join(reports.TABLE_EXAMPLES)}")
    text = reports.ex2_table() if args.example == "ex2" else reports.ex4_table()
    out = _out_dir(args)
    _write(out / f"table_{args.example}.csv", text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dofde", description="LSSVR solver for distributed-order fractional equations")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem and write report.json and solution.csv")
    _add_problem_args(p)
    p.add_argument("--sample-grid", type=parse_sample_grid, help="t samples as start:stop:step")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan-lambda", help="random search over the Gegenbauer parameter")
    _add_problem_args(p)
    p.add_argument("--range", type=_range, default=(0.1, 3.0), help="low:high")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_scan_lambda)

    p = sub.add_parser("table", help="reproduce a benchmark table as CSV")
    p.add_argument("--example", required=True, choices=BUILTIN_IDS)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dofde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, KeyError) as exc:
        print(f"dofde: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
