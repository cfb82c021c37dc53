"""Problem files: an INI-style description of a custom problem.

Example (the relaxation problem with a distributed-order derivative)::

    [problem]
    name = relaxation
    dimension = 1
    time_domain = 0, 1
    source = 0

    [distributed]
    phi = 6*theta*(1-theta)
    theta_range = 0, 1
    quadrature_order = 10

    [identity]
    coef = 1/10

    [constraint]
    kind = value
    at = 0
    target = 1

    [solver]
    d = 20
    n = 20

Term sections are ``identity``, ``caputo``, ``spatial`` and ``distributed``;
repeat a kind with a suffix (``[caputo.2]``). Constraints are ``constraint``
(a point) and ``edge`` (2-D, sampled at collocation coordinates).
Expressions use the grammar of :mod:`dofde.expr`.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .expr import compile_expression
from .fractional import DistributedTerm
from .problem import (
    CaputoTime,
    Distributed,
    EdgeConstraint,
    Identity,
    NonlinearTerm,
    PointConstraint,
    Problem,
    SpatialDerivative,
)


class ProblemFileError(ValueError):
    pass


def _floats(text: str, count: int | None = None) -> tuple:
    try:
        values = tuple(float(v) for v in text.replace(":", ",").split(","))
    except ValueError:
        raise ProblemFileError(f"expected numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise ProblemFileError(f"expected {count} numbers, got {text!r}")
    return values


def _function_or_number(text: str, variables):
    try:
        return float(text)
    except ValueError:
        return compile_expression(text, variables)


def _kind(section: str) -> str:
    return section.split(".", 1)[0].strip().lower()


def parse_problem(text: str, name: str = "custom") -> tuple[Problem, dict]:
    """Parse problem-file text; returns the problem and the ``[solver]`` options."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ProblemFileError(str(exc)) from None
    if not cp.has_section("problem"):
        raise ProblemFileError("missing [problem] section")
    head = cp["problem"]
    dim = head.getint("dimension", 1)
    point_vars = ("t",) if dim == 1 else ("x", "t")

    terms = []
    constraints = []
    nonlinear = None
    solver = {}
    try:
        for section in cp.sections():
            sec = cp[section]
            kind = _kind(section)
            if kind == "problem":
                continue
            if kind == "identity":
                terms.append(Identity(_function_or_number(sec.get("coef", "1"), point_vars)))
            elif kind == "caputo":
                terms.append(CaputoTime(sec.getfloat("order"), _function_or_number(sec.get("coef", "1"), point_vars)))
            elif kind == "spatial":
                terms.append(SpatialDerivative(sec.getint("order"), _function_or_number(sec.get("coef", "1"), point_vars)))
            elif kind == "distributed":
                lo, hi = _floats(sec["theta_range"], 2)
                term = DistributedTerm(
                    compile_expression(sec["phi"], ("theta",)),
                    lo,
                    hi,
                    quadrature_order=sec.getint("quadrature_order", 10),
                    coefficient=_function_or_number(sec.get("coef", "1"), point_vars),
                )
                terms.append(Distributed(term))
            elif kind == "nonlinear":
                nonlinear = NonlinearTerm(
                    compile_expression(sec["f"], ("u",)), compile_expression(sec["fprime"], ("u",))
                )
            elif kind == "constraint":
                loc = _floats(sec["at"], dim)
                constraints.append(PointConstraint(loc, sec.get("kind", "value"), sec.getfloat("target", 0.0)))
            elif kind == "edge":
                fixed = sec["fixed"].strip()
                free = "x" if fixed == "t" else "t"
                constraints.append(
                    EdgeConstraint(
                        fixed,
                        sec.getfloat("at"),
                        _function_or_number(sec.get("target", "0"), (free,)),
                        sec.get("kind", "value"),
                    )
                )
            elif kind == "solver":
                solver = dict(sec)
            else:
                raise ProblemFileError(f"unknown section [{section}]")
        exact = head.get("exact")
        problem = Problem(
            name=head.get("name", name),
            dimension=dim,
            time_domain=_floats(head["time_domain"], 2),
            space_domain=_floats(head["space_domain"], 2) if dim == 2 else None,
            lhs_terms=tuple(terms),
            source=compile_expression(head.get("source", "0"), point_vars),
            constraints=tuple(constraints),
            nonlinear=nonlinear,
            exact=compile_expression(exact, point_vars) if exact else None,
        )
    except KeyError as exc:
        raise ProblemFileError(f"missing key {exc}") from None
    return problem, solver


def load_problem(path) -> tuple[Problem, dict]:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), name=path.stem)
