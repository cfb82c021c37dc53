"""LSSVR collocation solver.

The approximation u(t) = sum_i w_i G_i(t) is fitted by

    min  1/2 w^T w + gamma/2 e^T e   s.t.   Z w - rho = e

where row i of Z is the linear left-hand-side operator applied to every
basis function at collocation point i, followed by one row per point
constraint. In 2-D the weight matrix w[i, j] of G_i(x) G_j(t) is
vectorized row-major, so column ``i * d_t + j``.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .fractional import distributed_basis_row
from .gegenbauer import GegenbauerBasis, kernel_value
from .problem import (
    CaputoTime,
    Distributed,
    EdgeConstraint,
    Identity,
    PointConstraint,
    Problem,
    SpatialDerivative,
    coef_value,
)

__all__ = [
    "SolverConfig",
    "TrainedModel",
    "assemble",
    "build_bases",
    "collocation_grid",
    "evaluate",
    "kernel_value",
    "lambda_random_search",
    "operator_matrix",
    "default_config",
    "residual_report",
    "solve",
    "solve_dual",
    "solve_primal",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``d`` and ``n_points`` are integers in 1-D and ``(x, t)`` pairs in 2-D.
    ``quadrature_order`` overrides the order stored on distributed terms
    when given. ``basis_domain`` overrides the problem's time domain (1-D)
    or ``(space, time)`` domains (2-D).
    """

    d: int | tuple
    n_points: int | tuple
    gamma: float = 1e12
    lam: float = 0.5
    quadrature_order: int | None = None
    formulation: str = "primal"
    basis_domain: tuple | None = None
    picard_max_iters: int = 50
    picard_tol: float = 1e-10
    constraint_weight: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be positive")
        if self.formulation not in ("primal", "dual"):
            raise ValueError("formulation must be 'primal' or 'dual'")
        if min(np.atleast_1d(self.n_points)) < 1:
            raise ValueError("n_points must be positive")

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


@dataclass
class TrainedModel:
    basis: GegenbauerBasis | tuple
    weights: np.ndarray
    config: SolverConfig
    dimension: int
    problem_name: str = ""
    multipliers: np.ndarray | None = None
    residual_max: float = 0.0
    residual_rms: float = 0.0
    picard_iterations: int = 1
    converged: bool = True
    points: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, *point):
        return evaluate(self, point)


def evaluate(model: TrainedModel, point):
    """u(point) = sum_i w_i G_i(t) in 1-D, sum_ij w_ij G_i(x) G_j(t) in 2-D.

    ``point`` is ``(t,)`` or ``(x, t)``; coordinates may be arrays.
    """
    if len(point) != model.dimension:
        raise ValueError(f"model is {model.dimension}-D, got a point with {len(point)} coordinates")
    if model.dimension == 1:
        return model.basis.eval(point[0]) @ model.weights
    bx, bt = model.basis
    gx = bx.eval(point[0])
    gt = bt.eval(point[1])
    w = model.weights.reshape(bx.degree_count, bt.degree_count)
    return np.einsum("...i,ij,...j->...", gx, w, gt)


def _pair(value, name):
    if np.ndim(value) == 0:
        raise ValueError(f"2-D problems need a ({name}_x, {name}_t) pair")
    a, b = value
    return int(a), int(b)


def _with_quadrature(problem: Problem, order: int | None) -> Problem:
    if order is None:
        return problem
    terms = tuple(
        Distributed(dataclasses.replace(term.term, quadrature_order=order)) if isinstance(term, Distributed) else term
        for term in problem.lhs_terms
    )
    return dataclasses.replace(problem, lhs_terms=terms)


def build_bases(problem: Problem, config: SolverConfig):
    """Basis (1-D) or ``(space_basis, time_basis)`` pair (2-D) for a config."""
    if problem.dimension == 1:
        if np.ndim(config.d) != 0:
            raise ValueError("1-D problems need an integer d")
        domain = config.basis_domain or problem.time_domain
        return GegenbauerBasis(config.lam, int(config.d), domain)
    dx, dt = _pair(config.d, "d")
    xdom, tdom = config.basis_domain or (problem.space_domain, problem.time_domain)
    return GegenbauerBasis(config.lam, dx, xdom), GegenbauerBasis(config.lam, dt, tdom)


def collocation_grid(problem: Problem, config: SolverConfig) -> np.ndarray:
    """Roots of G_N over the basis domain; the tensor grid of roots in 2-D.

    Returns shape ``(N,)`` in 1-D and ``(n_x * n_t, 2)`` in 2-D with x the
    slow index.
    """
    bases = build_bases(problem, config)
    if problem.dimension == 1:
        if np.ndim(config.n_points) != 0:
            raise ValueError("1-D problems need an integer n_points")
        return bases.roots(int(config.n_points))
    nx, nt = _pair(config.n_points, "n_points")
    xs = bases[0].roots(nx)
    ts = bases[1].roots(nt)
    xx, tt = np.meshgrid(xs, ts, indexing="ij")
    return np.column_stack([xx.ravel(), tt.ravel()])


def _as_points(points, dimension):
    points = np.asarray(points, dtype=float)
    if dimension == 1:
        return points.reshape(-1, 1)
    return points.reshape(-1, 2)


def _rowwise_kron(a, b):
    return np.einsum("ni,nj->nij", a, b).reshape(a.shape[0], -1)


def operator_matrix(problem: Problem, basis, points) -> np.ndarray:
    """Linear left-hand-side operator applied to every basis function at every point."""
    pts = _as_points(points, problem.dimension)
    n = pts.shape[0]
    if problem.dimension == 1:
        t = pts[:, 0]
        size = basis.degree_count
    else:
        bx, bt = basis
        x, t = pts[:, 0], pts[:, 1]
        gx, gt = bx.eval(x), bt.eval(t)
        size = bx.degree_count * bt.degree_count
    z = np.zeros((n, size))
    for term in problem.lhs_terms:
        if isinstance(term, Distributed):
            coef = term.term.coefficient
        else:
            coef = term.coef
        c = np.array([coef_value(coef, p) for p in pts])

        if problem.dimension == 1:
            if isinstance(term, Identity):
                block = basis.eval(t)
            elif isinstance(term, CaputoTime):
                block = basis.caputo(t, term.order)
            elif isinstance(term, Distributed):
                block = distributed_basis_row(term.term, basis, t)
            else:
                raise ValueError(f"term {term!r} is not valid in a 1-D problem")
        else:
            if isinstance(term, Identity):
                block = _rowwise_kron(gx, gt)
            elif isinstance(term, CaputoTime):
                block = _rowwise_kron(gx, bt.caputo(t, term.order))
            elif isinstance(term, SpatialDerivative):
                block = _rowwise_kron(bx.derivative(x, term.order), gt)
            elif isinstance(term, Distributed):
                block = _rowwise_kron(gx, distributed_basis_row(term.term, bt, t))
            else:
                raise ValueError(f"unknown operator term {term!r}")

        block = c[:, None] * block
        bad = ~np.isfinite(block)
        if bad.any():
            i = np.argwhere(bad)[0][0]
            raise FloatingPointError(f"non-finite matrix entry at point {tuple(pts[i])} from term {term!r}")
        z += block
    return z


def expand_constraints(problem: Problem, points) -> list[PointConstraint]:
    """Point constraints, with edge constraints sampled at the collocation coordinates."""
    pts = _as_points(points, problem.dimension)
    out = []
    for con in problem.constraints:
        if isinstance(con, EdgeConstraint):
            free = pts[:, 0] if con.fixed == "t" else pts[:, 1]
            out.extend(con.expand(np.unique(free)))
        else:
            out.append(con)
    return out


def _constraint_row(problem: Problem, basis, con: PointConstraint) -> np.ndarray:
    if problem.dimension == 1:
        if len(con.location) != 1:
            raise ValueError(f"constraint location {con.location} is not 1-D")
        (t,) = con.location
        if con.kind == "value":
            return basis.eval(t)
        if con.kind == "dt":
            return basis.derivative(t, 1)
        raise ValueError("x-derivative constraints need a 2-D problem")
    if len(con.location) != 2:
        raise ValueError(f"constraint location {con.location} is not 2-D")
    bx, bt = basis
    x, t = con.location
    gx = bx.derivative(x, 1) if con.kind == "dx" else bx.eval(x)
    gt = bt.derivative(t, 1) if con.kind == "dt" else bt.eval(t)
    return np.outer(gx, gt).ravel()


def assemble(problem: Problem, basis, points, previous_solution=None, constraint_weight: float = 1.0):
    """Build ``(Z, rho)``: collocation rows followed by weighted constraint rows.

    With a nonlinear term, ``rho`` at a collocation point is the source minus
    the nonlinear term evaluated at ``previous_solution`` (a zero function
    when absent).
    """
    pts = _as_points(points, problem.dimension)
    z = operator_matrix(problem, basis, pts)
    rho = np.array([float(problem.source(*p)) for p in pts])
    if not np.all(np.isfinite(rho)):
        i = np.argwhere(~np.isfinite(rho))[0][0]
        raise FloatingPointError(f"source is not finite at point {tuple(pts[i])}")
    if problem.nonlinear is not None:
        if previous_solution is None:
            prev = np.zeros(len(pts))
        else:
            prev = np.atleast_1d(previous_solution(*pts.T))
        rho = rho - np.array([problem.nonlinear.f(float(u)) for u in prev])

    cons = expand_constraints(problem, pts)
    if cons:
        rows = np.array([_constraint_row(problem, basis, c) for c in cons])
        targets = np.array([c.target for c in cons], dtype=float)
        z = np.vstack([z, constraint_weight * rows])
        rho = np.concatenate([rho, constraint_weight * targets])
    return z, rho


def solve_primal(z, rho, gamma: float) -> np.ndarray:
    """Weights from ``(Z^T Z + I / gamma) w = Z^T rho`` (Cholesky)."""
    z = np.asarray(z, dtype=float)
    a = z.T @ z + np.eye(z.shape[1]) / gamma
    return cho_solve(cho_factor(a), z.T @ np.asarray(rho, dtype=float))


DUAL_DIGITS = 34


def solve_dual(z, rho, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Multipliers from ``(Z Z^T + I / gamma) beta = rho`` and ``w = Z^T beta``.

    The R x R system is formed and Cholesky-factored in 34-digit arithmetic.
    When R > D it is singular up to the 1/gamma ridge, and beta = gamma * e
    is large, so a float64 solve loses about log10(gamma * |e| * |Z|^2)
    digits of w to cancellation in Z^T beta.
    """
    z = np.asarray(z, dtype=float)
    rho = np.asarray(rho, dtype=float)
    with mpmath.workdps(DUAL_DIGITS):
        zm = mpmath.matrix(z.tolist())
        k = zm * zm.T
        ridge = mpmath.mpf(1) / mpmath.mpf(gamma)
        for i in range(k.rows):
            k[i, i] += ridge
        beta = mpmath.cholesky_solve(k, mpmath.matrix(rho.tolist()))
        w = zm.T * beta
        beta = np.array(beta.tolist(), dtype=float).reshape(-1)
        w = np.array(w.tolist(), dtype=float).reshape(-1)
    return beta, w


def _pointwise_residual(problem: Problem, model: TrainedModel, points) -> np.ndarray:
    pts = _as_points(points, problem.dimension)
    basis = model.basis
    lhs = operator_matrix(problem, basis, pts) @ model.weights
    if problem.nonlinear is not None:
        u = np.atleast_1d(model(*pts.T))
        lhs = lhs + np.array([problem.nonlinear.f(float(v)) for v in u])
    src = np.array([float(problem.source(*p)) for p in pts])
    return np.abs(lhs - src)


def _fit(z, rho, config):
    if config.formulation == "dual":
        beta, w = solve_dual(z, rho, config.gamma)
        return w, beta
    return solve_primal(z, rho, config.gamma), None


def solve(problem: Problem, config: SolverConfig) -> TrainedModel:
    """Train the LSSVR model; nonlinear terms are handled by Picard iteration."""
    problem = _with_quadrature(problem, config.quadrature_order)
    basis = build_bases(problem, config)
    points = collocation_grid(problem, config)
    pts = _as_points(points, problem.dimension)

    model = TrainedModel(
        basis=basis,
        weights=np.zeros(np.prod([b.degree_count for b in np.atleast_1d(basis)])),
        config=config,
        dimension=problem.dimension,
        problem_name=problem.name,
        points=points,
    )

    if problem.nonlinear is None:
        z, rho = assemble(problem, basis, pts, constraint_weight=config.constraint_weight)
        model.weights, model.multipliers = _fit(z, rho, config)
        model.picard_iterations = 1
    else:
        u_prev = np.zeros(len(pts))
        model.converged = False
        previous = None
        for it in range(1, config.picard_max_iters + 1):
            z, rho = assemble(problem, basis, pts, previous, config.constraint_weight)
            model.weights, model.multipliers = _fit(z, rho, config)
            model.picard_iterations = it
            u = np.atleast_1d(model(*pts.T))
            change = np.max(np.abs(u - u_prev))
            log.debug("picard iteration %d: max change %.3e", it, change)
            u_prev = u
            previous = dataclasses.replace(model)
            if change < config.picard_tol:
                model.converged = True
                break
        if not model.converged:
            warnings.warn(
                f"Picard iteration did not converge in {config.picard_max_iters} iterations", RuntimeWarning
            )

    res = _pointwise_residual(problem, model, pts)
    model.residual_max = float(res.max())
    model.residual_rms = float(np.sqrt(np.mean(res**2)))
    return model


DEFAULT_CONFIGS = {
    "ex1": SolverConfig(4, 4, quadrature_order=10),
    "ex2": SolverConfig(20, 20, quadrature_order=10),
    "ex3": SolverConfig((3, 3), (3, 3), quadrature_order=7),
    "ex4": SolverConfig((3, 15), (3, 15), quadrature_order=7),
}


def default_config(problem_id: str) -> SolverConfig:
    """Published basis sizes and quadrature orders of the benchmark problems (gamma = 1e12, lambda = 1/2)."""
    try:
        return DEFAULT_CONFIGS[problem_id]
    except KeyError:
        raise KeyError(f"no published configuration for {problem_id!r}") from None


def uniform_grid(problem: Problem, n) -> np.ndarray:
    """n uniform points over the time domain; an n x n (or n_x x n_t) grid in 2-D."""
    if problem.dimension == 1:
        return np.linspace(*problem.time_domain, int(n))
    nx, nt = (n, n) if np.ndim(n) == 0 else n
    xs = np.linspace(*problem.space_domain, int(nx))
    ts = np.linspace(*problem.time_domain, int(nt))
    xx, tt = np.meshgrid(xs, ts, indexing="ij")
    return np.column_stack([xx.ravel(), tt.ravel()])


def _is_grid_count(grid, dimension) -> bool:
    if np.ndim(grid) == 0:
        return True
    return dimension == 2 and isinstance(grid, tuple) and len(grid) == 2 and all(np.ndim(g) == 0 for g in grid)


def residual_report(model: TrainedModel, problem: Problem, grid=100):
    """Pointwise |LHS(u) - source| on a uniform grid (or explicit points).

    Returns ``(residuals, max, rms)``.
    """
    problem = _with_quadrature(problem, model.config.quadrature_order)
    if _is_grid_count(grid, problem.dimension):
        points = uniform_grid(problem, grid)
    else:
        points = grid
    res = _pointwise_residual(problem, model, points)
    return res, float(res.max()), float(np.sqrt(np.mean(res**2)))


class ScanTrial(NamedTuple):
    lam: float
    residual_max: float
    status: str


def lambda_random_search(problem: Problem, config: SolverConfig, lambda_range, trials: int, seed: int):
    """Random search over the Gegenbauer parameter.

    Draws ``trials`` values uniformly from ``lambda_range`` with a seeded
    generator, solves for each and records the training residual. Values
    within 1e-3 of zero are skipped. Returns ``(best_lambda, trace)``.
    """
    low, high = map(float, lambda_range)
    if not low > -0.5:
        raise ValueError("lambda range must lie above -1/2")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    trace = []
    for lam in rng.uniform(low, high, int(trials)):
        lam = float(lam)
        if abs(lam) < 1e-3:
            trace.append(ScanTrial(lam, float("nan"), "skipped"))
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                model = solve(problem, dataclasses.replace(config, lam=lam))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.info("lambda %.6g failed: %s", lam, exc)
            trace.append(ScanTrial(lam, float("nan"), "failed"))
            continue
        trace.append(ScanTrial(lam, model.residual_max, "ok"))
    ok = [tr for tr in trace if tr.status == "ok"]
    best = min(ok, key=lambda tr: tr.residual_max).lam if ok else None
    return best, trace
