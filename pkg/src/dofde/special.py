"""Scalar special functions and Gauss-Legendre quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_QUADRATURE_ORDER = 64


def gamma(x: float) -> float:
    """Gamma function for positive finite arguments.

    Integer arguments up to 21 return the exact factorial.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"gamma is defined here for finite x > 0, got {x!r}")
    if x.is_integer() and x <= 21:
        return float(math.factorial(int(x) - 1))
    return math.gamma(x)


def legendre_eval(n: int, x: float) -> tuple[float, float]:
    """Return ``(P_n(x), P_n'(x))`` by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n == 0:
        return 1.0, 0.0
    p_prev, p = 1.0, x
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    if abs(x) == 1.0:
        # endpoint limit of the derivative formula below
        dp = 0.5 * n * (n + 1) * x ** (n + 1)
    else:
        dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _legendre_array(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, f, a: float = -1.0, b: float = 1.0) -> float:
        x, w = map_rule(self, a, b)
        return float(np.dot(w, [f(xi) for xi in x]))


def gauss_legendre_rule(order: int) -> QuadratureRule:
    """Nodes and weights of the ``order``-point Gauss-Legendre rule.

    Nodes are the roots of P_order, found by Newton iteration from the
    Chebyshev-like guesses ``cos(pi (j + 0.75) / (order + 0.5))``.
    """
    order = int(order)
    if not 1 <= order <= MAX_QUADRATURE_ORDER:
        raise ValueError(f"quadrature order must be in [1, {MAX_QUADRATURE_ORDER}], got {order}")
    if order == 1:
        return QuadratureRule(1, np.array([0.0]), np.array([2.0]))

    j = np.arange(order)
    x = np.cos(np.pi * (j + 0.75) / (order + 0.5))
    for _ in range(100):
        p, dp = _legendre_array(order, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    else:
        raise RuntimeError(f"Newton iteration for Legendre roots of order {order} did not converge")

    # one more pass so the derivative matches the converged nodes
    p, dp = _legendre_array(order, x)
    x = x - p / dp
    p, dp = _legendre_array(order, x)

    x = x[::-1]
    dp = dp[::-1]
    # exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 2.0 / ((1.0 - x**2) * dp**2)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(order, x, w)


def map_rule(rule: QuadratureRule, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Map a rule from [-1, 1] to [a, b]; returns ``(nodes, scaled_weights)``."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    half = 0.5 * (b - a)
    nodes = half * rule.nodes + 0.5 * (a + b)
    return nodes, half * rule.weights
