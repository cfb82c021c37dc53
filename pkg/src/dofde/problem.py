"""Declarative description of distributed-order fractional problems.

Every problem is stored in the canonical form ``LHS(u) = source`` with all
operator terms on the left. Scalar functions of the point take ``(t,)`` in
1-D and ``(x, t)`` in 2-D.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .fractional import DistributedTerm, caputo_power_coefficient, distributed_power
from .special import gamma

Coef = Union[float, Callable[..., float]]


def coef_value(coef: Coef, point) -> float:
    return float(coef(*point)) if callable(coef) else float(coef)


@dataclass(frozen=True)
class Identity:
    coef: Coef = 1.0


@dataclass(frozen=True)
class CaputoTime:
    order: float
    coef: Coef = 1.0

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("Caputo order must be non-negative")


@dataclass(frozen=True)
class SpatialDerivative:
    """Integer derivative in x (2-D problems only)."""

    order: int
    coef: Coef = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("spatial derivative order must be 1 or 2")


@dataclass(frozen=True)
class Distributed:
    term: DistributedTerm


OperatorTerm = Union[Identity, CaputoTime, SpatialDerivative, Distributed]


@dataclass(frozen=True)
class NonlinearTerm:
    """Pointwise term ``f(u)`` added to the left-hand side."""

    f: Callable[[float], float]
    fprime: Callable[[float], float]

    def __post_init__(self):
        if not math.isfinite(self.f(0.0)):
            raise ValueError("nonlinear term must be finite at u = 0")


CONSTRAINT_KINDS = ("value", "dt", "dx")


@dataclass(frozen=True)
class PointConstraint:
    """``kind`` of u at ``location`` equals ``target``.

    ``kind`` is ``"value"``, ``"dt"`` (first time derivative) or ``"dx"``.
    ``location`` is ``(t,)`` or ``(x, t)``.
    """

    location: tuple
    kind: str
    target: float

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"constraint kind must be one of {CONSTRAINT_KINDS}")


@dataclass(frozen=True)
class EdgeConstraint:
    """Condition along a domain edge of a 2-D problem.

    ``fixed`` names the coordinate held at ``at`` (``"t"`` for initial
    data, ``"x"`` for boundary data). At assembly the edge is sampled at the
    collocation coordinates of the other variable. ``target`` is a number
    or a function of the free coordinate.
    """

    fixed: str
    at: float
    target: Coef = 0.0
    kind: str = "value"

    def __post_init__(self):
        if self.fixed not in ("x", "t"):
            raise ValueError("fixed must be 'x' or 't'")
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"constraint kind must be one of {CONSTRAINT_KINDS}")

    def expand(self, free_values) -> list[PointConstraint]:
        out = []
        for v in free_values:
            loc = (float(v), self.at) if self.fixed == "t" else (self.at, float(v))
            out.append(PointConstraint(loc, self.kind, coef_value(self.target, (v,))))
        return out


@dataclass(frozen=True)
class PowerSolution:
    """Sum of separable monomials ``c * x**px * t**pt`` (``px`` ignored in 1-D)."""

    terms: tuple

    def __call__(self, *point):
        if len(point) == 1:
            (t,) = point
            return sum(c * np.asarray(t, dtype=float) ** pt for c, _, pt in self.terms)
        x, t = (np.asarray(v, dtype=float) for v in point)
        return sum(c * x**px * t**pt for c, px, pt in self.terms)


@dataclass(frozen=True)
class Problem:
    name: str
    dimension: int
    time_domain: tuple
    lhs_terms: tuple
    source: Callable[..., float]
    constraints: tuple = ()
    space_domain: tuple | None = None
    nonlinear: NonlinearTerm | None = None
    exact: PowerSolution | None = None

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.dimension == 2 and self.space_domain is None:
            raise ValueError("2-D problems need a space_domain")
        if not self.lhs_terms:
            raise ValueError("a problem needs at least one left-hand-side term")
        if self.dimension == 1 and any(isinstance(term, SpatialDerivative) for term in self.lhs_terms):
            raise ValueError("spatial derivatives need a 2-D problem")
        if not self.constraints:
            warnings.warn(f"problem {self.name!r} has no constraints; it may be ill-posed", stacklevel=2)


def _power_gap_over_log(t: float, p: float, q: float) -> float:
    """(t**p - t**q) / ln t, patched at its removable singularities t = 0 and t = 1."""
    if t == 0.0:
        return 0.0
    lt = math.log(t)
    if abs(lt) < 1e-5:
        # (e^{pL} - e^{qL}) / L expanded in L
        return (p - q) + (p * p - q * q) * lt / 2 + (p**3 - q**3) * lt * lt / 6
    return (t**p - t**q) / lt


def _ex1() -> Problem:
    term = DistributedTerm(lambda th: gamma(3 - th), 0.2, 1.5, quadrature_order=10)
    return Problem(
        name="ex1",
        dimension=1,
        time_domain=(0.2, 1.5),
        lhs_terms=(Distributed(term),),
        source=lambda t: 2.0 * _power_gap_over_log(t, 1.8, 0.5),
        constraints=(PointConstraint((0.0,), "value", 0.0), PointConstraint((0.0,), "dt", 0.0)),
        exact=PowerSolution(((1.0, 0, 2),)),
    )


def _ex2() -> Problem:
    term = DistributedTerm(lambda th: 6.0 * th * (1.0 - th), 0.0, 1.0, quadrature_order=10)
    return Problem(
        name="ex2",
        dimension=1,
        time_domain=(0.0, 1.0),
        lhs_terms=(Distributed(term), Identity(0.1)),
        source=lambda t: 0.0,
        constraints=(PointConstraint((0.0,), "value", 1.0),),
    )


def _ex3() -> Problem:
    term = DistributedTerm(lambda th: gamma(3 - th), 0.0, 1.0, quadrature_order=7)
    return Problem(
        name="ex3",
        dimension=2,
        time_domain=(0.0, 1.0),
        space_domain=(0.0, 2.0),
        lhs_terms=(Distributed(term), SpatialDerivative(2, -1.0)),
        source=lambda x, t: 2.0 * t * t + 2.0 * x * (2.0 - x) * _power_gap_over_log(t, 2.0, 1.0),
        constraints=(EdgeConstraint("t", 0.0), EdgeConstraint("x", 0.0), EdgeConstraint("x", 2.0)),
        exact=PowerSolution(((2.0, 1, 2), (-1.0, 2, 2))),
    )


def _ex4() -> Problem:
    term = DistributedTerm(lambda th: gamma(3.5 - th), 0.0, 1.0, quadrature_order=7)
    c = 15.0 * math.sqrt(math.pi) / 8.0

    def source(x, t):
        xx = x * (x - 1.0)
        return c * xx * _power_gap_over_log(t, 2.5, 1.5) - 2.0 * t**2.5 - t**5 * xx * xx

    return Problem(
        name="ex4",
        dimension=2,
        time_domain=(0.0, 1.0),
        space_domain=(0.0, 1.0),
        lhs_terms=(Distributed(term), SpatialDerivative(2, -1.0)),
        nonlinear=NonlinearTerm(lambda u: -u * u, lambda u: -2.0 * u),
        source=source,
        constraints=(EdgeConstraint("t", 0.0), EdgeConstraint("x", 0.0), EdgeConstraint("x", 1.0)),
        exact=PowerSolution(((1.0, 2, 2.5), (-1.0, 1, 2.5))),
    )


_BUILTINS = {"ex1": _ex1, "ex2": _ex2, "ex3": _ex3, "ex4": _ex4}
BUILTIN_IDS = tuple(_BUILTINS)


def builtin(problem_id: str) -> Problem:
    """One of the four benchmark problems ``ex1`` .. ``ex4``."""
    try:
        return _BUILTINS[problem_id]()
    except KeyError:
        raise KeyError(f"unknown example {problem_id!r}; valid ids: {', '.join(BUILTIN_IDS)}") from None


def exact_solution(problem_id: str):
    """Exact solution of a built-in problem, or None when none is known (ex2)."""
    return builtin(problem_id).exact


def apply_lhs(problem: Problem, solution: PowerSolution, point: Sequence[float]) -> float:
    """Left-hand side of ``problem`` applied to a separable power solution.

    Independent of any basis: Caputo derivatives act directly on the powers
    of t, spatial derivatives are taken analytically. The nonlinear term is
    included.
    """
    if problem.dimension == 1:
        (t,) = point
        x = 1.0
    else:
        x, t = point
    total = 0.0
    for term in problem.lhs_terms:
        if isinstance(term, Distributed):
            c = coef_value(term.term.coefficient, point)
            total += c * sum(
                cf * x**px * float(distributed_power(term.term, pt, t)) for cf, px, pt in solution.terms
            )
        elif isinstance(term, Identity):
            total += coef_value(term.coef, point) * float(solution(*point))
        elif isinstance(term, CaputoTime):
            total += coef_value(term.coef, point) * sum(
                cf * x**px * caputo_power_coefficient(pt, term.order) * t ** (pt - term.order)
                for cf, px, pt in solution.terms
                if caputo_power_coefficient(pt, term.order) != 0.0
            )
        elif isinstance(term, SpatialDerivative):
            k = term.order
            total += coef_value(term.coef, point) * sum(
                cf * math.perm(px, k) * x ** (px - k) * t**pt for cf, px, pt in solution.terms if px >= k
            )
    if problem.nonlinear is not None:
        total += problem.nonlinear.f(float(solution(*point)))
    return total
