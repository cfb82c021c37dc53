"""Caputo derivatives of power functions and the distributed-order operator.

The distributed-order operator

    int_a^b phi(theta) D^theta u(t) dtheta

is discretized with a Gauss-Legendre rule in theta, so that on a
polynomial basis it reduces to a weighted sum of Caputo derivatives of
monomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .special import gamma, gauss_legendre_rule, map_rule


def caputo_monomial_coefficient(m: int, alpha: float) -> float:
    """Coefficient c with D^alpha t^m = c t^(m - alpha) (Caputo, lower terminal 0).

    Monomials of degree below ceil(alpha) are annihilated, so the result
    is exactly 0 for ``m < ceil(alpha)``.
    """
    if m < 0 or alpha < 0:
        raise ValueError("need m >= 0 and alpha >= 0")
    if alpha == 0:
        return 1.0
    if m < math.ceil(alpha):
        return 0.0
    if float(alpha).is_integer():
        return float(math.perm(m, int(alpha)))
    return gamma(m + 1) / gamma(m - alpha + 1)


def caputo_power_coefficient(p: float, alpha: float) -> float:
    """Like :func:`caputo_monomial_coefficient` for a real power ``t**p``.

    Non-integer powers need ``p > ceil(alpha) - 1`` for the Caputo integral
    to exist.
    """
    if float(p).is_integer():
        return caputo_monomial_coefficient(int(p), alpha)
    if alpha == 0:
        return 1.0
    if p <= math.ceil(alpha) - 1:
        raise ValueError(f"Caputo derivative of order {alpha} of t**{p} is not defined")
    return gamma(p + 1) / gamma(p - alpha + 1)


@dataclass
class DistributedTerm:
    """Distributed-order term ``coefficient * int_a^b phi(theta) D^theta u dtheta``.

    ``phi`` is a scalar function of theta. ``coefficient`` may be a number
    or a function of the collocation point; it is applied during assembly.
    """

    phi: Callable[[float], float]
    theta_lower: float
    theta_upper: float
    quadrature_order: int = 10
    coefficient: float | Callable = 1.0

    def __post_init__(self):
        if not self.theta_lower < self.theta_upper:
            raise ValueError("theta_lower must be below theta_upper")
        if self.theta_lower < 0:
            raise ValueError("Caputo orders must be non-negative")

    @cached_property
    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Mapped theta nodes and the weights ``(b-a)/2 * w_j * phi(theta_j)``."""
        rule = gauss_legendre_rule(self.quadrature_order)
        nodes, weights = map_rule(rule, self.theta_lower, self.theta_upper)
        phi = np.array([float(self.phi(th)) for th in nodes])
        bad = ~np.isfinite(phi)
        if bad.any():
            raise ValueError(f"phi is not finite at theta = {nodes[bad].tolist()}")
        return nodes, weights * phi


def distributed_basis_row(term: DistributedTerm, basis, t) -> np.ndarray:
    """Distributed-order operator applied to every basis function at ``t``.

    Returns shape ``(d,)`` for scalar ``t`` and ``(len(t), d)`` otherwise.
    The term's ``coefficient`` is not included.
    """
    nodes, weights = term.nodes_weights
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((t_arr.size, basis.degree_count))
    for theta, w in zip(nodes, weights):
        if w == 0.0:
            continue
        out += w * basis.caputo(t_arr, theta)
    return out[0] if np.ndim(t) == 0 else out


def distributed_power(term: DistributedTerm, p: float, t):
    """Distributed-order operator applied to ``t**p`` (quadrature in theta)."""
    nodes, weights = term.nodes_weights
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for theta, w in zip(nodes, weights):
        c = caputo_power_coefficient(p, theta)
        if c != 0.0:
            total = total + w * c * t ** (p - theta)
    return total
